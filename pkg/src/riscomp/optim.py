"""Phase-only compensation of an imperfect RIS configuration.

The compensated coefficients are ``w_bar = w' * exp(1j * theta_bar)`` where
``w'`` is the calibrated (imperfect) configuration. The objective

    J(theta_bar) = -sum_i |D_i + sum_n G[i, n] w_bar_n|^2

is the negated combined-response energy over all K subcarriers, with ``D``
and ``G`` the direct and per-element composite frequency responses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .configure import wrap_phase
from .ofdm import element_responses


@dataclass
class OptimizerOptions:
    """Step rule and stopping settings.

    ``energy_per_reflector`` rescales the channel inside :func:`optimize` so
    that the coherent-combining energy equals ``energy_per_reflector * N``;
    this makes a given ``gamma`` behave the same for every channel scale and
    array size. ``None`` runs on the raw channel.
    """

    gamma: float = 1e-2
    max_iters: int = 200
    stop_rel_tol: float = 1e-6
    stop_window: int = 5
    method: str = "gd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    energy_per_reflector: float | None = 5.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.stop_window < 1:
            raise ValueError("stop_window must be at least 1")
        if self.method not in ("gd", "adam"):
            raise ValueError(f"unknown optimizer {self.method!r}")


@dataclass
class CompensationState:
    theta_bar: np.ndarray
    iter: int = 0
    objective_trace: list = field(default_factory=list)
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    @classmethod
    def start(cls, n: int) -> "CompensationState":
        return cls(np.zeros(n), 0, [], np.zeros(n), np.zeros(n))


def _check(G: np.ndarray, vec: np.ndarray, name: str):
    if vec.shape != (G.shape[1],):
        raise ValueError(f"{name} has shape {vec.shape}, expected ({G.shape[1]},)")


COMPENSATION_MODES = ("unit", "preserve")


def calibrated(omega_hat, mode: str = "unit") -> np.ndarray:
    """Configuration handed to the optimizer from a measured imperfect one.

    ``unit`` keeps only the realised phases, ``exp(1j * arg w_hat)``, so the
    compensated coefficients are ``exp(1j * (theta' + theta_bar))``.
    ``preserve`` keeps the measured magnitudes as well.
    """
    omega_hat = np.asarray(omega_hat)
    if mode == "unit":
        return np.exp(1j * np.angle(omega_hat))
    if mode == "preserve":
        return omega_hat.astype(complex)
    raise ValueError(f"compensation mode must be one of {COMPENSATION_MODES}, got {mode!r}")


def compensated(omega_prime, theta_bar) -> np.ndarray:
    return np.asarray(omega_prime) * np.exp(1j * np.asarray(theta_bar, dtype=float))


def _objective(D, G, omega_bar) -> float:
    c = D + G @ omega_bar
    return -float(np.vdot(c, c).real)


def _gradient(D, G, omega_prime, theta_bar) -> np.ndarray:
    w = compensated(omega_prime, theta_bar)
    c = D + G @ w
    # d|c_i|^2/dtheta_n = 2 Re{conj(c_i) * j G_in w_n} = -2 Im{conj(c_i) G_in w_n}
    return 2.0 * np.imag((np.conj(c) @ G) * w)


def objective(ch, omega_bar) -> float:
    D, G = element_responses(ch)
    omega_bar = np.asarray(omega_bar)
    _check(G, omega_bar, "omega_bar")
    return _objective(D, G, omega_bar)


def gradient(ch, omega_prime, theta_bar) -> np.ndarray:
    """Analytic dJ/dtheta_bar, shape (N,)."""
    D, G = element_responses(ch)
    omega_prime = np.asarray(omega_prime)
    theta_bar = np.asarray(theta_bar, dtype=float)
    _check(G, omega_prime, "omega_prime")
    _check(G, theta_bar, "theta_bar")
    return _gradient(D, G, omega_prime, theta_bar)


def numerical_gradient(fun: Callable[[np.ndarray], float], x, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = step
        grad[i] = (fun(x + e) - fun(x - e)) / (2 * step)
        e[i] = 0.0
    return grad


def gradient_error(ch, omega_prime, theta_bar, step: float = 1e-5) -> float:
    """Max relative error of the analytic gradient against finite differences.

    Errors are measured against the largest finite-difference component so
    near-zero entries do not blow the ratio up.
    """
    D, G = element_responses(ch)
    analytic = _gradient(D, G, np.asarray(omega_prime), np.asarray(theta_bar, dtype=float))
    numeric = numerical_gradient(lambda t: _objective(D, G, compensated(omega_prime, t)), theta_bar, step)
    scale = np.max(np.abs(numeric))
    if scale == 0.0:
        return float(np.max(np.abs(analytic)))
    return float(np.max(np.abs(analytic - numeric)) / scale)


def _finite(grad):
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    return grad


def gd_step(state: CompensationState, grad, opts: OptimizerOptions) -> CompensationState:
    grad = _finite(grad)
    state.theta_bar = state.theta_bar - opts.gamma * grad
    state.iter += 1
    return state


def adam_step(state: CompensationState, grad, opts: OptimizerOptions) -> CompensationState:
    grad = _finite(grad)
    if state.m is None:
        state.m = np.zeros_like(state.theta_bar)
        state.v = np.zeros_like(state.theta_bar)
    t = state.iter + 1
    state.m = opts.beta1 * state.m + (1 - opts.beta1) * grad
    state.v = opts.beta2 * state.v + (1 - opts.beta2) * grad * grad
    m_hat = state.m / (1 - opts.beta1 ** t)
    v_hat = state.v / (1 - opts.beta2 ** t)
    state.theta_bar = state.theta_bar - opts.gamma * m_hat / (np.sqrt(v_hat) + opts.eps_adam)
    state.iter = t
    return state


def channel_scale(D, G, energy_per_reflector: float | None) -> float:
    """Amplitude factor mapping the coherent-bound energy to ``e * N``."""
    if energy_per_reflector is None:
        return 1.0
    bound = np.abs(D) + np.abs(G).sum(axis=1)
    energy = float(bound @ bound)
    if energy == 0.0:
        return 1.0
    return float(np.sqrt(energy_per_reflector * max(G.shape[1], 1) / energy))


def optimize(ch, omega_prime, opts: OptimizerOptions | None = None,
             callback: Callable[[int, np.ndarray], None] | None = None):
    """Descend J from ``theta_bar = 0``; returns (best wrapped theta_bar, state).

    Stops after ``max_iters`` steps or once the relative objective change
    over the last ``stop_window`` steps drops below ``stop_rel_tol``.
    ``objective_trace`` holds J on the unscaled channel, one entry per
    iterate including the start. ``callback(iter, theta_bar)`` sees every
    iterate.
    """
    opts = opts or OptimizerOptions()
    D, G = element_responses(ch)
    omega_prime = np.asarray(omega_prime)
    _check(G, omega_prime, "omega_prime")
    a = channel_scale(D, G, opts.energy_per_reflector)
    Ds, Gs = D * a, G * a
    step = gd_step if opts.method == "gd" else adam_step

    state = CompensationState.start(G.shape[1])
    J = _objective(D, G, omega_prime)
    state.objective_trace.append(J)
    best_J, best = J, state.theta_bar.copy()
    if callback is not None:
        callback(0, state.theta_bar)
    w = opts.stop_window
    while state.iter < opts.max_iters:
        state = step(state, _gradient(Ds, Gs, omega_prime, state.theta_bar), opts)
        J = _objective(D, G, compensated(omega_prime, state.theta_bar))
        state.objective_trace.append(J)
        if callback is not None:
            callback(state.iter, state.theta_bar)
        if J < best_J:
            best_J, best = J, state.theta_bar.copy()
        if state.iter >= w:
            ref = state.objective_trace[-1 - w]
            if ref != 0.0 and abs(J - ref) / abs(ref) < opts.stop_rel_tol:
                break
    return wrap_phase(best), state
