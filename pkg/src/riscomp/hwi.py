"""RIS hardware imperfections: phase-shift noise and surface deformation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RisGeometry
from .rng import RandomStream


@dataclass(frozen=True)
class PsnSpec:
    """Phase-shift noise; ``epsilon = 1`` is noise-free, ``0`` fully random."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class DeformationSpec:
    """Regular surface bumps of height ``h_max`` (m) with peak parameter ``k`` (rad).

    ``elev_a``/``elev_b`` are the LOS elevation angles of the incident and
    reflected waves. ``row_mode`` picks how element indices map to the
    deformation profile: ``floor`` groups whole rows, ``round`` rounds
    n / n_cols to the nearest integer (ties away from zero).
    """

    h_max: float
    k: float = np.pi
    elev_a: float = 0.0
    elev_b: float = 0.0
    row_mode: str = "floor"

    def __post_init__(self):
        if self.h_max < 0:
            raise ValueError("h_max must be non-negative")
        if self.row_mode not in ("floor", "round"):
            raise ValueError(f"row_mode must be 'floor' or 'round', got {self.row_mode!r}")


def apply_psn(omega, spec: PsnSpec, s: RandomStream) -> np.ndarray:
    """Mix the configured coefficients with real Gaussian noise.

    Returns ``eps * omega + v * sqrt(1 - eps^2)`` with ``v ~ N(0, 1)`` i.i.d.
    The result is not renormalised; ``E|w|^2 = 1`` holds only on average.
    """
    omega = np.asarray(omega, dtype=complex)
    noise = s.standard_normal(omega.shape)
    eps = spec.epsilon
    return eps * omega + noise * np.sqrt(1.0 - eps * eps)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def deformation_offsets(geom: RisGeometry, spec: DeformationSpec) -> np.ndarray:
    """Per-element phase error (rad) caused by the deformed surface."""
    if geom.n_cols < 2:
        raise ValueError("deformation profile needs n_cols >= 2")
    n = np.arange(geom.n_elements)
    if spec.row_mode == "floor":
        idx = n // geom.n_cols
    else:
        idx = _round_half_away(n / geom.n_cols)
    psi = idx / (geom.n_cols - 1)
    scale = 2 * np.pi / geom.wavelength * spec.h_max * (np.cos(spec.elev_a) + np.cos(spec.elev_b))
    return scale * np.sin(spec.k * psi)


def apply_deformation(theta, offsets) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if theta.shape != offsets.shape:
        raise ValueError(f"shape mismatch: {theta.shape} vs {offsets.shape}")
    return theta + offsets


def compose_imperfections(theta_ideal, geom: RisGeometry | None = None,
                          deform: DeformationSpec | None = None,
                          psn: PsnSpec | None = None,
                          s: RandomStream | None = None) -> np.ndarray:
    """Realised coefficients: deformation on the phases first, then PSN."""
    theta = np.asarray(theta_ideal, dtype=float)
    if deform is not None:
        if geom is None:
            raise ValueError("deformation requires the RIS geometry")
        theta = apply_deformation(theta, deformation_offsets(geom, deform))
    omega = np.exp(1j * theta)
    if psn is not None:
        if s is None:
            raise ValueError("phase-shift noise requires a random stream")
        omega = apply_psn(omega, psn, s)
    return omega
