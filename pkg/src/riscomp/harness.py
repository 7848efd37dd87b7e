"""Monte Carlo runner: per-trial draws, configurations, compensation, aggregation.

Each trial owns independent random streams keyed by ``(seed, trial, purpose)``,
so trials can execute in any order or concurrently and still produce the
same records. Aggregates are reduced in trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg
from .channel import ChannelSpec, RisGeometry, sample_channel
from .configure import random_compensator, random_configure, stm_configure
from .hwi import DeformationSpec, PsnSpec, compose_imperfections
from .ofdm import OfdmSpec, coherent_upper_bound, configured_rate, dbm_to_watts, relative_rate
from .optim import OptimizerOptions, calibrated, compensated, optimize
from .rng import Purpose, RandomStream, trial_stream_id


@dataclass
class ScenarioSpec:
    """Everything one Monte Carlo scenario needs, built from flat parameters."""

    params: dict
    channel: ChannelSpec
    ofdm: OfdmSpec
    psn: PsnSpec
    deformation: DeformationSpec | None
    optimizer: OptimizerOptions
    labels: tuple
    trials: int
    seed: int
    name: str = "default"
    compensation: str = "unit"
    init: str = "stm"
    trace: bool = False

    @classmethod
    def from_params(cls, raw: dict | None = None, trace: bool = False, paper_scale: bool = False) -> "ScenarioSpec":
        p = cfg.normalize(raw or {}, paper_scale)
        if p["trials"] < 1:
            raise cfg.ConfigError("trials must be at least 1", "trials")
        if not 0 <= p["seed"] < 2 ** 64:
            raise cfg.ConfigError("seed must be an unsigned 64-bit integer", "seed")
        try:
            geom = RisGeometry.from_wavelengths(p["n_rows"], p["n_cols"], p["d_over_lambda"], p["f_c_hz"])
            chan = ChannelSpec(geom, tuple(p["ap_pos_m"]), tuple(p["ue_pos_m"]), p["L_a"], p["L_b"], p["L_d"],
                               p["kappa_nlos"], p["direct_rel_db"])
            M = chan.tap_count(p["b_hz"])
            ofdm = OfdmSpec(p["k_subcarriers"], M, p["b_hz"], dbm_to_watts(p["n0_dbm_hz"]), dbm_to_watts(p["p_dbm"]))
            psn = PsnSpec(p["epsilon"])
            deform = None
            if p["h_max_over_lambda"] > 0:
                deform = DeformationSpec(p["h_max_over_lambda"] * geom.wavelength, p["k_peaks"] * math.pi,
                                         chan.los_in.elevation, chan.los_out.elevation, p["row_mode"])
            opts = OptimizerOptions(p["gamma"], p["max_iters"], p["stop_rel_tol"], p["stop_window"],
                                    p["optimizer"], energy_per_reflector=p["energy_per_reflector"])
        except ValueError as exc:
            if isinstance(exc, cfg.ConfigError):
                raise
            raise cfg.ConfigError(str(exc)) from exc
        return cls(p, chan, ofdm, psn, deform, opts, tuple(p["labels"]), p["trials"], p["seed"],
                   p["scenario"], p["compensation"], p["init"], trace)

    def with_param(self, key: str, value) -> "ScenarioSpec":
        raw = {k: v for k, v in self.params.items()}
        if key == "n_reflectors":
            raw.pop("n_rows")
            raw.pop("n_cols")
        elif key not in cfg.numeric_keys():
            raise cfg.ConfigError(f"cannot sweep over {key!r}; numeric keys are {cfg.numeric_keys()}", key)
        raw[key] = value
        return ScenarioSpec.from_params(raw, self.trace)

    @property
    def n_elements(self) -> int:
        return self.channel.geometry.n_elements


@dataclass
class TrialRecord:
    trial: int
    rates: dict = field(default_factory=dict)
    relative: dict = field(default_factory=dict)
    m_star: int = -1
    iterations: int = 0
    final_objective: float = float("nan")
    objective_trace: list = field(default_factory=list)
    relative_trace: list = field(default_factory=list)
    draws: dict = field(default_factory=dict)
    degenerate: bool = False
    zero_direct_tap: bool = False


def run_trial(spec: ScenarioSpec, trial: int) -> TrialRecord:
    """Evaluate every requested label on one shared channel and impairment draw."""
    streams = {p: RandomStream(spec.seed, trial_stream_id(trial, p)) for p in Purpose}
    rec = TrialRecord(trial)
    ch = sample_channel(spec.channel, spec.ofdm, streams[Purpose.CHANNEL])
    if not (np.any(ch.h_d) or np.any(ch.V)):
        rec.degenerate = True
        return rec
    bound = coherent_upper_bound(ch, spec.ofdm)
    if not bound > 0:
        rec.degenerate = True
        return rec

    def record(label, omega):
        rate = configured_rate(ch, omega, spec.ofdm)
        rec.rates[label] = rate
        rec.relative[label] = relative_rate(rate, bound)

    N = spec.n_elements
    stm = stm_configure(ch)
    rec.m_star = stm.m_star
    rec.zero_direct_tap = stm.zero_direct_tap
    theta_base = stm.config.theta if spec.init == "stm" else np.zeros(N)
    # one impairment realization shared by every impaired label
    omega_hat = compose_imperfections(theta_base, spec.channel.geometry, spec.deformation, spec.psn,
                                      streams[Purpose.PSN])
    omega_prime = calibrated(omega_hat, spec.compensation)

    if "ideal_stm" in spec.labels:
        record("ideal_stm", stm.config.omega)
    if "impaired_stm" in spec.labels:
        record("impaired_stm", omega_hat)
    if "compensated" in spec.labels:
        callback = None
        if spec.trace:
            def callback(_, theta_bar):
                rate = configured_rate(ch, compensated(omega_prime, theta_bar), spec.ofdm)
                rec.relative_trace.append(relative_rate(rate, bound))
        theta_bar, state = optimize(ch, omega_prime, spec.optimizer, callback)
        record("compensated", compensated(omega_prime, theta_bar))
        rec.iterations = state.iter
        rec.objective_trace = state.objective_trace
        rec.final_objective = state.objective_trace[-1]
    if "random_config" in spec.labels:
        record("random_config", random_configure(N, streams[Purpose.RANDOM_CONFIG]).omega)
    if "random_compensator" in spec.labels:
        record("random_compensator",
               compensated(omega_prime, random_compensator(N, streams[Purpose.RANDOM_COMPENSATOR])))
    rec.draws = {p.name.lower(): streams[p].draws for p in Purpose}
    return rec


@dataclass
class LabelStats:
    mean: float
    stderr: float
    count: int
    mean_rate: float


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    records: list
    stats: dict
    n_degenerate: int

    def valid(self):
        return [r for r in self.records if not r.degenerate]

    def mean_trace(self, length: int | None = None) -> np.ndarray:
        """Per-iteration mean compensated relative rate.

        Traces of trials that stopped early are padded with their final value.
        """
        traces = [r.relative_trace for r in self.valid() if r.relative_trace]
        if not traces:
            raise ValueError("no relative-rate traces recorded; run with trace=True")
        n = length or max(len(t) for t in traces)
        padded = np.array([t[:n] + [t[-1]] * (n - len(t[:n])) for t in traces])
        return padded.mean(axis=0)

    def paired_gap(self, upper: str, lower: str) -> tuple[float, float]:
        """Mean and standard error of ``upper - lower`` over the same trials."""
        d = np.array([r.relative[upper] - r.relative[lower] for r in self.valid()])
        se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else float("nan")
        return float(d.mean()), se


def aggregate(records, labels) -> dict:
    valid = [r for r in sorted(records, key=lambda r: r.trial) if not r.degenerate]
    if not valid:
        raise ValueError("no valid (non-degenerate) trials to aggregate")
    out = {}
    for label in labels:
        rel = np.array([r.relative[label] for r in valid])
        rates = np.array([r.rates[label] for r in valid])
        se = float(rel.std(ddof=1) / math.sqrt(rel.size)) if rel.size > 1 else float("nan")
        out[label] = LabelStats(float(rel.mean()), se, int(rel.size), float(rates.mean()))
    return out


def run_scenario(spec: ScenarioSpec, n_jobs: int = 1) -> ScenarioResult:
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            records = list(pool.map(lambda t: run_trial(spec, t), range(spec.trials)))
    else:
        records = [run_trial(spec, t) for t in range(spec.trials)]
    records.sort(key=lambda r: r.trial)
    stats = aggregate(records, spec.labels)
    return ScenarioResult(spec, records, stats, sum(r.degenerate for r in records))


def sweep(base: ScenarioSpec, axis: str, values, n_jobs: int = 1) -> list:
    """One scenario per value of ``axis``; every run shares the base seed."""
    specs = [base.with_param(axis, v) for v in values]
    return [(v, run_scenario(s, n_jobs)) for v, s in zip(values, specs)]
