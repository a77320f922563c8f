import math
import warnings

import numpy as np
import pytest

from nvbath import kernels
from nvbath.errors import ConfigError, StatisticsError
from nvbath.montecarlo import (
    TrajectoryConfig, closed_form_ou_fid, dump_trajectory_csv, estimate_autocorrelation,
    estimate_psd, generate_ou_trajectory, simulate_echo_decay, simulate_fid_decay,
    trajectory_rng,
)
from nvbath.relaxation import closed_form_ou_echo
from nvbath.units import GAMMA_NV


def cfg(**kw):
    base = dict(tau_c=1e-6, sigma_B=1e-6, dt=1e-8, n_steps=400, n_trajectories=2000, seed=3)
    base.update(kw)
    return TrajectoryConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        cfg(dt=0.6e-6)
    with pytest.raises(ConfigError):
        cfg(n_trajectories=1)
    with pytest.raises(ConfigError):
        cfg(seed=-1)
    with pytest.warns(UserWarning):
        cfg(dt=0.2e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cfg(dt=0.6e-6, allow_coarse=True)


def test_exact_discretization_coefficients():
    c = cfg()
    assert c.decay == pytest.approx(math.exp(-0.01))
    assert c.kick**2 + (c.decay * c.sigma_B) ** 2 == pytest.approx(c.sigma_B**2, rel=1e-12)


def test_stationary_variance_any_dt():
    # exact update keeps the variance for coarse steps too
    c = cfg(dt=2e-6, n_steps=5, n_trajectories=20000, allow_coarse=True)
    B = generate_ou_trajectory(c)
    v = B[:, -1].var()
    se = c.sigma_B**2 * math.sqrt(2 / (c.n_trajectories - 1))
    assert abs(v - c.sigma_B**2) < 4 * se


def test_trajectories_independent_of_block_layout():
    c = cfg(n_trajectories=600)
    full = generate_ou_trajectory(c)
    part = generate_ou_trajectory(c, 517, 521)
    np.testing.assert_array_equal(full[517:521], part)


def test_rng_keyed_by_seed_and_index():
    a = trajectory_rng(1, 0).standard_normal(4)
    assert not np.array_equal(a, trajectory_rng(1, 1).standard_normal(4))
    assert not np.array_equal(a, trajectory_rng(2, 0).standard_normal(4))
    np.testing.assert_array_equal(a, trajectory_rng(1, 0).standard_normal(4))


def test_autocorrelation_estimator():
    c = cfg(n_steps=800)
    est = estimate_autocorrelation(generate_ou_trajectory(c), c.dt, 300)
    expect = c.sigma_B**2 * np.exp(-est.lags / c.tau_c)
    z = np.abs(est.A - expect) / est.stderr
    assert np.max(z[:: 25]) < 4


def test_autocorrelation_single_trajectory_blocks():
    c = cfg(n_steps=200_000, n_trajectories=2, dt=1e-7)
    B = generate_ou_trajectory(c, 0, 1)
    est = estimate_autocorrelation(B, c.dt, 20)
    assert est.samples.shape[0] == 100
    with pytest.raises(StatisticsError):
        estimate_autocorrelation(B[:, :1000], c.dt, 20)


def test_psd_normalization_and_shape():
    c = cfg(n_steps=2**14, n_trajectories=64, dt=5e-8)
    est = estimate_psd(generate_ou_trajectory(c), c.dt, nperseg=2048)
    assert est.integral() == pytest.approx(est.variance, rel=0.05)
    assert est.variance == pytest.approx(c.sigma_B**2, rel=0.1)
    # low-frequency plateau near (2/pi) tau_c sigma^2 (Welch has a window bias)
    low = est.normalized(c.sigma_B**2)[1:4].mean()
    assert low == pytest.approx(2 * c.tau_c / math.pi, rel=0.25)


def test_echo_matches_closed_form():
    c = cfg(n_trajectories=4000, sigma_B=1e6 / GAMMA_NV)  # Delta = 1e6 rad/s
    taus = [1e-6, 2e-6, 4e-6]
    res = simulate_echo_decay(c, taus)
    exact = np.exp(-closed_form_ou_echo((GAMMA_NV * c.sigma_B) ** 2, c.tau_c, np.array(taus)))
    assert np.all(np.abs(res.mean_signal - exact) < 4 * res.stderr + 2e-3)


def test_fid_matches_closed_form():
    c = cfg(n_trajectories=4000, sigma_B=1e6 / GAMMA_NV)
    ts = [1e-6, 2e-6]
    res = simulate_fid_decay(c, ts)
    exact = np.exp(-closed_form_ou_fid((GAMMA_NV * c.sigma_B) ** 2, c.tau_c, np.array(ts)))
    assert np.all(np.abs(res.mean_signal - exact) < 4 * res.stderr + 2e-3)


def test_echo_tau_validation():
    c = cfg()
    with pytest.raises(ConfigError):
        simulate_echo_decay(c, [1.01e-6 + 0.5e-8])  # odd multiple of dt
    with pytest.raises(ConfigError):
        simulate_echo_decay(c, [0.5e-6])  # below 100 steps
    with pytest.raises(ConfigError):
        simulate_echo_decay(c, [6e-6])  # beyond n_steps


def test_zero_field_is_flat():
    res = simulate_echo_decay(cfg(sigma_B=0.0), [1e-6, 2e-6])
    np.testing.assert_array_equal(res.mean_signal, 1.0)


def test_workers_do_not_change_result():
    c = cfg(n_trajectories=1500)
    a = simulate_echo_decay(c, [2e-6])
    b = simulate_echo_decay(c, [2e-6], workers=3)
    np.testing.assert_array_equal(a.mean_signal, b.mean_signal)
    np.testing.assert_array_equal(a.stderr, b.stderr)


def test_trajectory_dump(tmp_path):
    c = cfg(n_steps=10)
    dump_trajectory_csv(tmp_path / "a.csv", c, 4)
    dump_trajectory_csv(tmp_path / "b.csv", c, 4)
    text = (tmp_path / "a.csv").read_text()
    assert text == (tmp_path / "b.csv").read_text()
    assert text.splitlines()[0] == "t_s,B_T"
    assert len(text.splitlines()) == 12


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")
def test_backends_bit_identical():
    cy, py = kernels.get_backend("cython"), kernels.get_backend("python")
    rng = np.random.default_rng(0)
    xi = rng.standard_normal((37, 501))
    a, s = math.exp(-0.01), 0.3
    np.testing.assert_array_equal(cy.ou_paths(xi, a, s, 2.0), py.ou_paths(xi, a, s, 2.0))
    idx = np.array([0, 50, 100, 250, 500], dtype=np.intp)
    np.testing.assert_array_equal(cy.ou_integrals(xi, a, s, 2.0, 1e-8, idx),
                                  py.ou_integrals(xi, a, s, 2.0, 1e-8, idx))


def test_backend_lookup():
    assert kernels.get_backend("python").__name__.endswith("_ou_fallback")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
