"""CSV writers for per-trial rows, sweep aggregates and optimizer traces."""

from __future__ import annotations

import csv
from pathlib import Path

TRIAL_HEADER = ("scenario", "label", "n", "k_subcarriers", "epsilon", "h_max_over_lambda", "k_peaks",
                "trial", "iterations", "rate_bps", "relative_rate", "seed")
SWEEP_HEADER = ("scenario", "axis", "value", "label", "n", "k_subcarriers", "epsilon", "h_max_over_lambda",
                "k_peaks", "trials", "valid_trials", "mean_relative_rate", "stderr_relative_rate",
                "mean_rate_bps", "seed")
TRACE_HEADER = ("trial", "iter", "objective", "relative_rate")


def fmt(x) -> str:
    """Round-trip exact text for floats (17 significant digits)."""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _scenario_cols(spec) -> list:
    p = spec.params
    return [spec.n_elements, p["k_subcarriers"], p["epsilon"], p["h_max_over_lambda"], p["k_peaks"]]


def trial_rows(result):
    spec = result.spec
    for rec in result.valid():
        for label in spec.labels:
            its = rec.iterations if label == "compensated" else 0
            yield [spec.name, label, *_scenario_cols(spec), rec.trial, its,
                   rec.rates[label], rec.relative[label], spec.seed]


def sweep_rows(axis: str, results):
    for value, result in results:
        spec = result.spec
        for label in spec.labels:
            st = result.stats[label]
            yield [spec.name, axis, value, label, *_scenario_cols(spec), spec.trials, st.count,
                   st.mean, st.stderr, st.mean_rate, spec.seed]


def trace_rows(result):
    for rec in result.valid():
        rel = rec.relative_trace or [float("nan")] * len(rec.objective_trace)
        for i, (obj, r) in enumerate(zip(rec.objective_trace, rel)):
            yield [rec.trial, i, obj, r]


def write_csv(path, header, rows) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            n += 1
    return n


def sibling(path, suffix: str) -> Path:
    """``out.csv`` -> ``out<suffix>.csv``."""
    p = Path(path)
    return p.with_name(p.stem + suffix + p.suffix)
