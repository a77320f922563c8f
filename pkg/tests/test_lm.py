import numpy as np
import pytest

from nvbath.lm import levenberg_marquardt


def test_rosenbrock():
    fun = lambda x: np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])  # noqa: E731
    jac = lambda x: np.array([[-20 * x[0], 10.0], [-1.0, 0.0]])  # noqa: E731
    r = levenberg_marquardt(fun, jac, np.array([-1.2, 1.0]))
    assert r.converged
    np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-10)
    assert np.all(np.diff(r.cost_history) <= 0)


def test_bounds_respected():
    fun = lambda x: np.array([x[0] - 3.0])  # noqa: E731
    jac = lambda x: np.array([[1.0]])  # noqa: E731
    r = levenberg_marquardt(fun, jac, np.array([0.0]), lower=np.array([-1.0]), upper=np.array([2.0]))
    assert r.x[0] == pytest.approx(2.0)


def test_linear_least_squares_matches_lstsq():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 3))
    y = rng.standard_normal(30)
    r = levenberg_marquardt(lambda x: A @ x - y, lambda x: A, np.zeros(3))
    # cost-based acceptance resolves x only to ~sqrt(machine eps) relative
    np.testing.assert_allclose(r.x, np.linalg.lstsq(A, y, rcond=None)[0], rtol=1e-6)
