"""Scenario parameters as a flat, strictly-validated key/value document.

All dB/dBm quantities and wavelength multiples are converted to SI units
when a :class:`~riscomp.harness.ScenarioSpec` is built; nothing downstream
sees a logarithmic unit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

LABELS = ("ideal_stm", "impaired_stm", "compensated", "random_config", "random_compensator")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


DEFAULTS: dict = {
    "scenario": "default",
    "n_rows": 10,
    "n_cols": 10,
    "d_over_lambda": 0.25,
    "f_c_hz": 3e9,
    "ap_pos_m": [25.0, 43.30127018922193, 0.0],
    "ue_pos_m": [-6.840402866513374, 18.79385241571817, 0.0],
    "L_a": 21,
    "L_b": 11,
    "L_d": 20,
    "kappa_nlos": 0.1,
    "direct_rel_db": -20.0,
    "k_subcarriers": 128,
    "b_hz": 10.5e6,
    "n0_dbm_hz": -164.0,
    "p_dbm": 30.0,
    "epsilon": 1.0,
    "h_max_over_lambda": 0.0,
    "k_peaks": 1.0,
    "row_mode": "floor",
    "optimizer": "gd",
    "gamma": 1e-2,
    "max_iters": 200,
    "stop_rel_tol": 1e-6,
    "stop_window": 5,
    "energy_per_reflector": 5.0,
    "compensation": "unit",
    "init": "stm",
    "labels": list(LABELS),
    "trials": 100,
    "seed": 0,
}

PAPER_SCALE = {"k_subcarriers": 700, "L_a": 101, "L_b": 51, "L_d": 100}

ALIASES = {"rho": "epsilon"}

_INT_KEYS = {"n_rows", "n_cols", "L_a", "L_b", "L_d", "k_subcarriers", "max_iters", "stop_window", "trials", "seed"}
_STR_CHOICES = {
    "row_mode": ("floor", "round"),
    "optimizer": ("gd", "adam"),
    "compensation": ("unit", "preserve"),
    "init": ("stm", "zero"),
}
# axes a sweep may vary, besides every numeric key above
DERIVED_AXES = ("n_reflectors",)


def numeric_keys() -> tuple:
    return tuple(k for k, v in DEFAULTS.items()
                 if isinstance(v, (int, float)) and not isinstance(v, bool)) + DERIVED_AXES


def _square_side(n: int) -> int:
    side = math.isqrt(int(n))
    if side * side != int(n) or side < 1:
        raise ConfigError(f"n_reflectors={n} is not a positive perfect square", "n_reflectors")
    return side


def normalize(raw: dict, paper_scale: bool = False) -> dict:
    """Merge ``raw`` over the defaults, resolving aliases and checking types.

    Unknown keys raise :class:`ConfigError` naming the key.
    """
    params = dict(DEFAULTS)
    if paper_scale:
        params.update(PAPER_SCALE)
    seen = set()
    for key, value in raw.items():
        name = ALIASES.get(key, key)
        if name not in DEFAULTS and name not in DERIVED_AXES:
            raise ConfigError(f"unknown configuration key {key!r}", key)
        if name in seen:
            raise ConfigError(f"key {key!r} given twice (directly or via alias)", key)
        seen.add(name)
        if name == "n_reflectors":
            if "n_rows" in raw or "n_cols" in raw:
                raise ConfigError("n_reflectors conflicts with n_rows/n_cols", key)
            side = _square_side(value)
            params["n_rows"] = params["n_cols"] = side
            continue
        params[name] = _coerce(name, value)
    return params


def _coerce(name: str, value):
    default = DEFAULTS[name]
    if name in _STR_CHOICES:
        if value not in _STR_CHOICES[name]:
            raise ConfigError(f"{name} must be one of {_STR_CHOICES[name]}, got {value!r}", name)
        return value
    if name == "scenario":
        if not isinstance(value, str) or not value or "," in value:
            raise ConfigError("scenario must be a non-empty string without commas", name)
        return value
    if name in ("ap_pos_m", "ue_pos_m"):
        if not (isinstance(value, list) and len(value) == 3 and all(_is_number(v) for v in value)):
            raise ConfigError(f"{name} must be a list of three numbers", name)
        return [float(v) for v in value]
    if name == "labels":
        if not isinstance(value, list) or not value:
            raise ConfigError("labels must be a non-empty list", name)
        bad = [v for v in value if v not in LABELS]
        if bad:
            raise ConfigError(f"unknown labels {bad}; choose from {LABELS}", name)
        return [lab for lab in LABELS if lab in value]
    if name == "energy_per_reflector" and value is None:
        return None
    if not _is_number(value):
        raise ConfigError(f"{name} must be numeric, got {value!r}", name)
    if name in _INT_KEYS:
        if float(value) != int(value):
            raise ConfigError(f"{name} must be an integer, got {value!r}", name)
        return int(value)
    return float(value) if isinstance(default, float) or default is None else value


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def load_config(path, paper_scale: bool = False) -> dict:
    """Read and validate a JSON scenario document."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return normalize(raw, paper_scale)
