"""scikit-learn style front end for the phase compensator.

``fit`` learns compensation phases for one channel realization and a
calibrated imperfect configuration; ``transform`` applies them.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .channel import ChannelRealization
from .optim import OptimizerOptions, calibrated, compensated, objective, optimize


def check_channel(ch) -> ChannelRealization:
    """Validate a realization, or build one from an ``(h_d, V)`` pair."""
    if isinstance(ch, tuple):
        h_d, V = (np.asarray(a, dtype=complex) for a in ch)
        ch = ChannelRealization(h_d, V, h_d.shape[0])
    if not isinstance(ch, ChannelRealization):
        raise TypeError(f"expected a ChannelRealization or (h_d, V) tuple, got {type(ch).__name__}")
    if ch.h_d.ndim != 1 or ch.V.ndim != 2 or ch.V.shape[1] != ch.h_d.shape[0]:
        raise ValueError(f"inconsistent channel shapes h_d {ch.h_d.shape}, V {ch.V.shape}")
    if not (np.all(np.isfinite(ch.h_d)) and np.all(np.isfinite(ch.V))):
        raise ValueError("channel contains non-finite taps")
    return ch


def check_configuration(omega, n: int) -> np.ndarray:
    omega = np.asarray(omega, dtype=complex)
    if omega.shape != (n,):
        raise ValueError(f"configuration has shape {omega.shape}, expected ({n},)")
    if not np.all(np.isfinite(omega)):
        raise ValueError("configuration contains non-finite entries")
    return omega


# complex-valued output cannot be wrapped into a DataFrame, so set_output is off
class PhaseCompensator(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Gradient-descent phase compensation of an imperfect RIS configuration.

    Parameters mirror :class:`~riscomp.optim.OptimizerOptions`, plus
    ``compensation`` (``"unit"`` or ``"preserve"``) selecting whether the
    imperfect configuration's magnitudes are kept.

    Attributes
    ----------
    theta_bar_ : ndarray of shape (N,)
        Compensation phases, wrapped to [-pi, pi).
    omega_prime_ : ndarray of shape (N,)
        Calibrated configuration the phases were fitted for.
    n_iter_ : int
    objective_trace_ : list of float
    """

    def __init__(self, method="gd", gamma=1e-2, max_iters=200, stop_rel_tol=1e-6, stop_window=5,
                 beta1=0.9, beta2=0.999, eps_adam=1e-8, energy_per_reflector=5.0, compensation="unit"):
        self.method = method
        self.gamma = gamma
        self.max_iters = max_iters
        self.stop_rel_tol = stop_rel_tol
        self.stop_window = stop_window
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps_adam = eps_adam
        self.energy_per_reflector = energy_per_reflector
        self.compensation = compensation

    def _options(self) -> OptimizerOptions:
        return OptimizerOptions(self.gamma, self.max_iters, self.stop_rel_tol, self.stop_window, self.method,
                                self.beta1, self.beta2, self.eps_adam, self.energy_per_reflector)

    def fit(self, X, y):
        """Fit on channel ``X`` with measured imperfect configuration ``y``."""
        ch = check_channel(X)
        omega_hat = check_configuration(y, ch.n_elements)
        self.omega_prime_ = calibrated(omega_hat, self.compensation)
        self.theta_bar_, state = optimize(ch, self.omega_prime_, self._options())
        self.n_iter_ = state.iter
        self.objective_trace_ = list(state.objective_trace)
        return self

    def transform(self, X=None):
        """Compensated coefficients.

        ``X`` may be another calibrated configuration of the same size; by
        default the fitted one is used.
        """
        check_is_fitted(self, "theta_bar_")
        omega = self.omega_prime_ if X is None else calibrated(
            check_configuration(X, self.theta_bar_.size), self.compensation)
        return compensated(omega, self.theta_bar_)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).transform()

    def score(self, X, y=None):
        """Combined-response energy on channel ``X`` (higher is better)."""
        ch = check_channel(X)
        return -objective(ch, self.transform(y))
