"""Subcarrier responses, water-filling and achievable rate of an OFDM link."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def dbm_to_watts(dbm: float) -> float:
    return 10 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class OfdmSpec:
    """K subcarriers over bandwidth B (Hz), M channel taps.

    ``N0`` is the noise density in W/Hz and ``P`` the mean per-subcarrier
    transmit power in W.
    """

    K: int
    M: int
    B: float = 10.5e6
    N0: float = dbm_to_watts(-164.0)
    P: float = dbm_to_watts(30.0)

    def __post_init__(self):
        if not self.K >= self.M >= 1:
            raise ValueError(f"need K >= M >= 1, got K={self.K}, M={self.M}")
        if self.B <= 0 or self.N0 <= 0 or self.P <= 0:
            raise ValueError("B, N0 and P must be positive")

    @property
    def xi(self) -> int:
        """Symbol length including the cyclic prefix."""
        return self.K + self.M - 1

    @property
    def noise_power(self) -> float:
        return self.B * self.N0


@dataclass
class SubcarrierResponse:
    combined: np.ndarray  # (K,)
    direct: np.ndarray  # (K,)
    composite_per_element: np.ndarray  # (K, N)


def dft_response(taps) -> np.ndarray:
    """H[i] = sum_j taps[j] exp(-2j pi i j / K) along the last axis."""
    taps = np.asarray(taps)
    if taps.ndim == 0:
        raise ValueError("taps must be a vector")
    return np.fft.fft(taps, axis=-1)


def element_responses(ch) -> tuple[np.ndarray, np.ndarray]:
    """Direct response (K,) and per-element composite responses (K, N)."""
    return dft_response(ch.h_d), dft_response(ch.V).T


def combined_response(ch, omega) -> SubcarrierResponse:
    omega = np.asarray(omega)
    direct, G = element_responses(ch)
    if omega.shape != (G.shape[1],):
        raise ValueError(f"omega has shape {omega.shape}, expected ({G.shape[1]},)")
    return SubcarrierResponse(direct + G @ omega, direct, G)


def water_fill(channel_gain_sq, spec: OfdmSpec, max_iter: int = 200) -> np.ndarray:
    """Water-filling powers with mean power ``spec.P`` over the K subcarriers.

    The water level is bracketed by bisection; once the active set is known
    the level is recomputed in closed form so that the power constraint holds
    to rounding error.
    """
    g = np.asarray(channel_gain_sq, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("channel gains must be finite and non-negative")
    active = g > 0
    if not active.any():
        raise ValueError("water-filling needs at least one subcarrier with positive gain")
    K = g.size
    total = K * spec.P
    floor = np.full(K, np.inf)
    floor[active] = spec.noise_power / g[active]

    def used(mu):
        return np.maximum(0.0, mu - floor[active]).sum()

    lo, hi = floor[active].min(), floor[active].max() + total
    mu = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mu = 0.5 * (lo + hi)
        excess = used(mu) - total
        if abs(excess) <= 1e-12 * total:
            break
        if excess > 0:
            hi = mu
        else:
            lo = mu
    # closed-form level on the identified active set, iterated until the set
    # is consistent with its own level
    on = floor < mu
    for _ in range(K + 1):
        if not on.any():
            on = floor == floor.min()
        mu = (total + floor[on].sum()) / on.sum()
        nxt = floor < mu
        if np.array_equal(nxt, on):
            break
        on = nxt
    p = np.zeros(K)
    p[on] = mu - floor[on]
    return p


def achievable_rate(resp, p, spec: OfdmSpec) -> float:
    """Rate in bit/s over the K subcarriers, cyclic-prefix loss included."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be non-negative")
    combined = resp.combined if isinstance(resp, SubcarrierResponse) else np.asarray(resp)
    snr = p * np.abs(combined) ** 2 / spec.noise_power
    return float(spec.B / spec.xi * np.log2(1.0 + snr).sum())


def rate_of_gains(gain_sq, spec: OfdmSpec) -> float:
    """Water-filled rate for per-subcarrier power gains ``|H_i|^2``."""
    gain_sq = np.asarray(gain_sq, dtype=float)
    if not np.any(gain_sq > 0):
        return 0.0
    p = water_fill(gain_sq, spec)
    return float(spec.B / spec.xi * np.log2(1.0 + p * gain_sq / spec.noise_power).sum())


def configured_rate(ch, omega, spec: OfdmSpec) -> float:
    """Water-filled rate of the channel under RIS coefficients ``omega``."""
    return rate_of_gains(np.abs(combined_response(ch, omega).combined) ** 2, spec)


def coherent_upper_bound(ch, spec: OfdmSpec) -> float:
    """Rate if every subcarrier combined all contributions in phase."""
    direct, G = element_responses(ch)
    mag = np.abs(direct) + np.abs(G).sum(axis=1)
    return rate_of_gains(mag ** 2, spec)


def relative_rate(actual: float, bound: float) -> float:
    if not bound > 0:
        raise ValueError(f"upper bound must be positive, got {bound}")
    return actual / bound
