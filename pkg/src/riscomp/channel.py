"""Multipath channel synthesis for the direct (AP->UE) and RIS-cascaded links.

The RIS lies in the xz-plane, centred at the origin, with outward normal +y.
Direction vectors use u(az, el) = (sin az cos el, cos az cos el, sin el), so
broadside incidence (az = el = 0) is along +y and contributes no array phase.

Path delays are mapped onto the tap grid with a band-limited kernel: a sinc
truncated to ``|x| < W`` with a raised-cosine edge taper over ``W/2 <= |x| < W``
and renormalised to unit energy. Tap ``lead`` holds the earliest arrival of
each channel (``lead = W`` by default so the kernel's leading lobes fit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream

C0 = 3e8
WINDOW_HALF_WIDTH = 6
AZIMUTH_SPREAD_DEG = 40.0
ELEVATION_SPREAD_DEG = 10.0


@dataclass(frozen=True)
class RisGeometry:
    n_rows: int
    n_cols: int
    d_h: float
    d_v: float
    f_c: float

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("RIS needs at least one row and one column")
        if self.d_h <= 0 or self.d_v <= 0:
            raise ValueError("element spacings must be positive")
        if self.f_c <= 0:
            raise ValueError("carrier frequency must be positive")

    @classmethod
    def from_wavelengths(cls, n_rows: int, n_cols: int, d_over_lambda: float = 0.25,
                         f_c: float = 3e9) -> "RisGeometry":
        lam = C0 / f_c
        return cls(n_rows, n_cols, d_over_lambda * lam, d_over_lambda * lam, f_c)

    @property
    def wavelength(self) -> float:
        return C0 / self.f_c

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    def positions(self) -> np.ndarray:
        """Element centres, shape (N, 3), row-major element order."""
        r, c = np.divmod(np.arange(self.n_elements), self.n_cols)
        x = (c - (self.n_cols - 1) / 2.0) * self.d_h
        z = (r - (self.n_rows - 1) / 2.0) * self.d_v
        return np.stack([x, np.zeros_like(x, dtype=float), z], axis=1)


@dataclass(frozen=True)
class PathAngles:
    azimuth: float
    elevation: float


@dataclass
class PathSet:
    """Delays (s), complex gains and angles (rad) of a multipath channel.

    ``los_index`` is 0 for LOS-dominated sets and None for pure NLOS sets.
    """

    delays: np.ndarray
    gains: np.ndarray
    azimuth: np.ndarray
    elevation: np.ndarray
    los_index: int | None = None

    def __len__(self) -> int:
        return len(self.delays)


@dataclass
class ChannelRealization:
    """Tap responses of one draw: ``h_d`` is (K,), ``V`` is (N, K)."""

    h_d: np.ndarray
    V: np.ndarray
    M: int

    @property
    def n_elements(self) -> int:
        return self.V.shape[0]

    @property
    def k_subcarriers(self) -> int:
        return self.h_d.shape[0]

    def scaled(self, factor: float) -> "ChannelRealization":
        return ChannelRealization(self.h_d * factor, self.V * factor, self.M)


def direction(azimuth, elevation) -> np.ndarray:
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    return np.stack([np.sin(az) * np.cos(el), np.cos(az) * np.cos(el), np.sin(el)], axis=-1)


def _angles_of(pos) -> PathAngles:
    x, y, z = (float(v) for v in pos)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise ValueError("terminal coincides with the RIS centre; LOS delay would be zero")
    return PathAngles(math.atan2(x, y), math.asin(z / r))


@dataclass
class ChannelSpec:
    """Geometry and path statistics of a scenario.

    ``direct_rel_db`` sets the total direct-channel power relative to the
    product of the two LOS hop gains (one reflector's cascade); ``kappa_nlos``
    is the total NLOS power of each cascade hop relative to its LOS power.
    """

    geometry: RisGeometry
    ap_pos: tuple = (25.0, 43.30127018922193, 0.0)
    ue_pos: tuple = (-6.840402866513374, 18.79385241571817, 0.0)
    L_a: int = 21
    L_b: int = 11
    L_d: int = 20
    kappa_nlos: float = 0.1
    direct_rel_db: float = -20.0
    window_half_width: int = WINDOW_HALF_WIDTH

    def __post_init__(self):
        if min(self.L_a, self.L_b, self.L_d) < 1:
            raise ValueError("every channel needs at least one path")
        if self.kappa_nlos < 0:
            raise ValueError("kappa_nlos must be non-negative")

    @property
    def tau_a(self) -> float:
        return float(np.linalg.norm(self.ap_pos)) / C0

    @property
    def tau_b(self) -> float:
        return float(np.linalg.norm(self.ue_pos)) / C0

    @property
    def tau_d(self) -> float:
        return float(np.linalg.norm(np.subtract(self.ap_pos, self.ue_pos))) / C0

    @property
    def los_in(self) -> PathAngles:
        return _angles_of(self.ap_pos)

    @property
    def los_out(self) -> PathAngles:
        return _angles_of(self.ue_pos)

    def los_gain(self, tau: float) -> float:
        """Free-space amplitude lambda / (4 pi d)."""
        return self.geometry.wavelength / (4 * math.pi * C0 * tau)

    def tap_count(self, bandwidth: float) -> int:
        """Taps needed for the worst-case delay spread of either channel."""
        spread = max(self.tau_d, self.tau_a + self.tau_b)
        return int(math.ceil(bandwidth * spread)) + 2 * self.window_half_width + 1


def _nlos_gains(s: RandomStream, count: int, total_power: float, cap: float | None = None):
    if count == 0:
        return np.zeros(0, dtype=complex)
    g = s.complex_normal(count, power=total_power / count)
    if cap is not None:
        # LOS must stay strictly strongest; redraws are vanishingly rare
        bad = np.abs(g) >= cap
        while bad.any():
            g[bad] = s.complex_normal(int(bad.sum()), power=total_power / count)
            bad = np.abs(g) >= cap
    return g


def sample_direct_paths(spec: ChannelSpec, s: RandomStream) -> PathSet:
    tau_d = spec.tau_d
    if not tau_d > 0:
        raise ValueError("direct LOS delay must be positive")
    L = spec.L_d
    budget = 10 ** (spec.direct_rel_db / 10) * (spec.los_gain(spec.tau_a) * spec.los_gain(spec.tau_b)) ** 2
    delays = s.uniform(tau_d, 2 * tau_d, L)
    gains = _nlos_gains(s, L, budget)
    # the direct link is NLOS; its angles are irrelevant to the RIS
    return PathSet(delays, gains, np.zeros(L), np.zeros(L), los_index=None)


def _cascade_hop(spec: ChannelSpec, s: RandomStream, tau1: float, L: int, los: PathAngles) -> PathSet:
    if not tau1 > 0:
        raise ValueError("LOS delay must be positive")
    g_los = spec.los_gain(tau1)
    delays = np.concatenate([[tau1], s.uniform(tau1, 2 * tau1, L - 1)])
    gains = np.concatenate([[complex(g_los)], _nlos_gains(s, L - 1, spec.kappa_nlos * g_los ** 2, cap=g_los)])
    az_off = np.radians(s.uniform(-AZIMUTH_SPREAD_DEG, AZIMUTH_SPREAD_DEG, L - 1))
    el_off = np.radians(s.uniform(-ELEVATION_SPREAD_DEG, ELEVATION_SPREAD_DEG, L - 1))
    az = los.azimuth + np.concatenate([[0.0], az_off])
    el = los.elevation + np.concatenate([[0.0], el_off])
    return PathSet(delays, gains, az, el, los_index=0)


def sample_cascade_paths(spec: ChannelSpec, s: RandomStream) -> tuple[PathSet, PathSet]:
    """AP->RIS (arrival) and RIS->UE (departure) path sets, LOS first."""
    pa = _cascade_hop(spec, s, spec.tau_a, spec.L_a, spec.los_in)
    pb = _cascade_hop(spec, s, spec.tau_b, spec.L_b, spec.los_out)
    return pa, pb


def array_phase(geom: RisGeometry, n: int, inc: PathAngles, out: PathAngles) -> float:
    """Phase (rad) imposed on element ``n`` by the array geometry."""
    if not 0 <= n < geom.n_elements:
        raise IndexError(f"element {n} outside 0..{geom.n_elements - 1}")
    p = geom.positions()[n]
    u = direction(inc.azimuth, inc.elevation) + direction(out.azimuth, out.elevation)
    return float(2 * np.pi / geom.wavelength * p @ u)


def _taper(x: np.ndarray, W: int) -> np.ndarray:
    a = np.abs(x)
    half = W / 2.0
    w = np.where(a <= half, 1.0, 0.5 * (1.0 + np.cos(np.pi * (a - half) / (W - half))))
    return np.where(a < W, w, 0.0)


def tap_kernel(offsets, n_taps: int, half_width: int = WINDOW_HALF_WIDTH, lead: int | None = None) -> np.ndarray:
    """Unit-energy band-limited kernels, one row per fractional delay offset.

    ``offsets`` are delays in samples relative to the earliest arrival.
    Raises ValueError when any kernel would spill outside ``n_taps``.
    """
    lead = half_width if lead is None else lead
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    # evaluate on a padded grid to detect spill-over
    m = np.arange(-half_width - 1, n_taps + half_width + 1)
    x = m[None, :] - lead - offsets[:, None]
    on_grid = np.abs(x - np.round(x)) < 1e-9
    k = np.where(on_grid, (np.round(x) == 0).astype(float), np.sinc(x) * _taper(x, half_width))
    inside = (m >= 0) & (m < n_taps)
    if np.any(k[:, ~inside] != 0.0):
        raise ValueError(f"delay spread does not fit in {n_taps} taps (half-width {half_width}, lead {lead})")
    k = k[:, inside]
    return k / np.linalg.norm(k, axis=1, keepdims=True)


def _pad(taps: np.ndarray, K: int) -> np.ndarray:
    M = taps.shape[-1]
    if M > K:
        raise ValueError(f"tap count M={M} exceeds K={K}")
    out = np.zeros(taps.shape[:-1] + (K,), dtype=complex)
    out[..., :M] = taps
    return out


def synthesize_direct_taps(paths: PathSet, ofdm, f_c: float, half_width: int = WINDOW_HALF_WIDTH,
                           lead: int | None = None) -> np.ndarray:
    """Direct channel taps h_d (length K, zero beyond tap M)."""
    tau = np.asarray(paths.delays, dtype=float)
    offsets = (tau - tau.min()) * ofdm.B
    kern = tap_kernel(offsets, ofdm.M, half_width, lead)
    w = paths.gains * np.exp(-2j * np.pi * f_c * tau)
    return _pad(w @ kern, ofdm.K)


def synthesize_composite_taps(pa: PathSet, pb: PathSet, geom: RisGeometry, ofdm,
                              half_width: int = WINDOW_HALF_WIDTH, lead: int | None = None) -> np.ndarray:
    """Per-reflector cascade taps V (N x K, zero beyond tap M).

    Each of the L_a * L_b cascade paths reaches every reflector with its own
    array phase, so reflector n sees the sum over all path pairs.
    """
    k0 = 2 * np.pi / geom.wavelength
    pos = geom.positions()
    ta = np.asarray(pa.delays, dtype=float)
    tb = np.asarray(pb.delays, dtype=float)
    A = pa.gains * np.exp(-2j * np.pi * geom.f_c * ta) * np.exp(1j * k0 * pos @ direction(pa.azimuth, pa.elevation).T)
    Bm = pb.gains * np.exp(-2j * np.pi * geom.f_c * tb) * np.exp(1j * k0 * pos @ direction(pb.azimuth, pb.elevation).T)
    tau = ta[:, None] + tb[None, :]
    offsets = (tau - tau.min()).ravel() * ofdm.B
    kern = tap_kernel(offsets, ofdm.M, half_width, lead).reshape(len(ta), len(tb), ofdm.M)
    V = np.einsum("nl,nk,lkm->nm", A, Bm, kern, optimize=True)
    return _pad(V, ofdm.K)


def sample_channel(spec: ChannelSpec, ofdm, s: RandomStream) -> ChannelRealization:
    """Draw one full realization: direct paths first, then the cascade."""
    direct = sample_direct_paths(spec, s)
    pa, pb = sample_cascade_paths(spec, s)
    W = spec.window_half_width
    h_d = synthesize_direct_taps(direct, ofdm, spec.geometry.f_c, W)
    V = synthesize_composite_taps(pa, pb, spec.geometry, ofdm, W)
    return ChannelRealization(h_d, V, ofdm.M)
