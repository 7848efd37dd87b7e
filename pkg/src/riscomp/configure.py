"""Baseline RIS configurations: strongest-tap maximization and random phases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RandomStream


def wrap_phase(theta):
    """Wrap angles to [-pi, pi)."""
    return (np.asarray(theta, dtype=float) + np.pi) % (2 * np.pi) - np.pi


@dataclass
class PhaseConfig:
    theta: np.ndarray
    label: str = "ideal_stm"

    def __post_init__(self):
        self.theta = wrap_phase(self.theta)

    @property
    def omega(self) -> np.ndarray:
        return np.exp(1j * self.theta)


@dataclass
class StmResult:
    config: PhaseConfig
    m_star: int
    tap_metric: np.ndarray
    # set when the direct tap at m_star is exactly zero and arg(0) := 0 was used
    zero_direct_tap: bool = False


def stm_configure(ch) -> StmResult:
    """Align every reflector to the direct channel at its strongest tap.

    For each tap m the aligned coefficients give a combined magnitude
    ``|h_d[m]| + sum_n |V[n, m]|``; the tap with the largest one wins (lowest
    index on ties).
    """
    M = ch.M
    if M < 1:
        raise ValueError("need at least one tap")
    hd = ch.h_d[:M]
    V = ch.V[:, :M]
    metric = (np.abs(hd) + np.abs(V).sum(axis=0)) ** 2
    if not np.any(metric > 0):
        raise ValueError("channel is identically zero on all taps; no configuration")
    m_star = int(np.argmax(metric))  # argmax returns the first maximum
    theta = np.angle(hd[m_star]) - np.angle(V[:, m_star])
    return StmResult(PhaseConfig(theta, "ideal_stm"), m_star, metric, zero_direct_tap=bool(hd[m_star] == 0))


def random_configure(N: int, s: RandomStream) -> PhaseConfig:
    if N < 1:
        raise ValueError("N must be at least 1")
    return PhaseConfig(s.uniform(-np.pi, np.pi, N), "random")


def random_compensator(N: int, s: RandomStream) -> np.ndarray:
    """Uniform random compensation phases; a performance floor for the optimizer."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return s.uniform(-np.pi, np.pi, N)
