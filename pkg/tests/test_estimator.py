import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from riscomp.channel import ChannelRealization
from riscomp.estimator import PhaseCompensator, check_channel, check_configuration
from riscomp.optim import OptimizerOptions, calibrated, objective, optimize


@pytest.fixture
def problem():
    rng = np.random.default_rng(0)
    M, K, N = 6, 32, 9
    h = np.zeros(K, complex)
    V = np.zeros((N, K), complex)
    h[:M] = rng.normal(size=M) + 1j * rng.normal(size=M)
    V[:, :M] = rng.normal(size=(N, M)) + 1j * rng.normal(size=(N, M))
    omega_hat = 0.5 * np.exp(1j * rng.uniform(-np.pi, np.pi, N)) + 0.8 * rng.normal(size=N)
    return ChannelRealization(h, V, M), omega_hat


def test_params_roundtrip():
    est = PhaseCompensator(method="adam", gamma=0.05)
    params = est.get_params()
    assert params["method"] == "adam" and params["gamma"] == 0.05
    est.set_params(max_iters=7, compensation="preserve")
    assert est.max_iters == 7 and est.compensation == "preserve"
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "theta_bar_")


def test_fit_matches_functional_optimizer(problem):
    ch, omega_hat = problem
    est = PhaseCompensator(gamma=0.02, max_iters=60).fit(ch, omega_hat)
    theta, state = optimize(ch, calibrated(omega_hat), OptimizerOptions(gamma=0.02, max_iters=60))
    np.testing.assert_array_equal(est.theta_bar_, theta)
    assert est.n_iter_ == state.iter
    assert est.objective_trace_ == state.objective_trace


def test_transform_improves_energy(problem):
    ch, omega_hat = problem
    est = PhaseCompensator()
    w = est.fit_transform(ch, omega_hat)
    np.testing.assert_allclose(np.abs(w), 1.0)
    assert objective(ch, w) < objective(ch, calibrated(omega_hat))
    assert est.score(ch) == pytest.approx(-objective(ch, w))


def test_preserve_mode_keeps_magnitudes(problem):
    ch, omega_hat = problem
    w = PhaseCompensator(compensation="preserve", max_iters=20).fit_transform(ch, omega_hat)
    np.testing.assert_allclose(np.abs(w), np.abs(omega_hat))


def test_transform_other_configuration(problem):
    ch, omega_hat = problem
    est = PhaseCompensator(max_iters=10).fit(ch, omega_hat)
    other = np.exp(1j * np.linspace(-1, 1, 9))
    np.testing.assert_allclose(est.transform(other), other * np.exp(1j * est.theta_bar_))


def test_accepts_tuple_channel(problem):
    ch, omega_hat = problem
    a = PhaseCompensator(max_iters=15).fit((ch.h_d[:ch.M], ch.V[:, :ch.M]), omega_hat)
    assert a.theta_bar_.shape == (9,)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PhaseCompensator().transform()


def test_input_validation(problem):
    ch, omega_hat = problem
    with pytest.raises(ValueError):
        check_configuration(omega_hat[:-1], 9)
    with pytest.raises(ValueError):
        check_configuration(np.full(9, np.nan), 9)
    with pytest.raises(TypeError):
        check_channel(np.zeros(4))
    bad = ChannelRealization(np.array([np.inf, 0]), np.zeros((2, 2)), 2)
    with pytest.raises(ValueError):
        check_channel(bad)
    with pytest.raises(ValueError):
        PhaseCompensator(method="newton").fit(ch, omega_hat)
