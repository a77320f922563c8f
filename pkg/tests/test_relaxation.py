import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nvbath.errors import DomainError
from nvbath.filters import T1Filter
from nvbath.noise import BathParams, NoiseSpectrum, RelaxationRateModel
from nvbath.relaxation import (
    KAPPA, calibrate_kappa, closed_form_ou_echo, coherence_function_echo, decay_signal,
    echo_decay_curve, echo_overlap_integral, predict_rates, t1_overlap_integral,
)
from nvbath.units import GAMMA_NV


def test_closed_form_limits():
    # fast noise: chi -> Delta^2 tau_c t ; slow noise: chi -> Delta^2 t^3 / (12 tau_c)
    d2 = 1e10
    assert closed_form_ou_echo(d2, 1e-9, 1e-5) == pytest.approx(d2 * 1e-9 * 1e-5, rel=1e-3)
    assert closed_form_ou_echo(d2, 1e-2, 1e-6) == pytest.approx(d2 * 1e-18 / 12 / 1e-2, rel=1e-3)


def test_closed_form_series_continuity():
    x = np.array([1 - 1e-12, 1 + 1e-12])
    v = closed_form_ou_echo(1.0, 1.0, x)
    assert v[0] == pytest.approx(v[1], rel=1e-9)


@given(st.floats(1e-4, 50.0))
def test_closed_form_series_vs_direct(x):
    direct = x - 3 + 4 * math.exp(-x / 2) - math.exp(-x)
    if x > 0.3:
        assert closed_form_ou_echo(1.0, 1.0, x) == pytest.approx(direct, rel=1e-9)
    assert closed_form_ou_echo(1.0, 1.0, x) > 0


@pytest.mark.parametrize("tau_c", [1e-9, 1e-7, 1e-6, 1e-5, 1e-3])
@pytest.mark.parametrize("tau", [1e-7, 1e-6, 1e-5])
def test_kappa_constant(tau_c, tau):
    assert calibrate_kappa(tau_c, tau) == pytest.approx(KAPPA, rel=1e-8)


def test_t1_overlap_fast_noise_limit():
    # for tau_c << 1/omega_0 the spectrum is flat over the lines: overlap -> S(0) * area
    s = NoiseSpectrum(1e-13)
    f = T1Filter()
    ref = sum(2 * (math.pi / 2 + math.atan(w / f.half_width)) for w in f.omega_i) * s.peak
    assert t1_overlap_integral(s, f) == pytest.approx(ref, rel=1e-3)


def test_t1_overlap_lorentz_lorentz():
    # two Lorentzians: compare against a direct dense quadrature
    from scipy.integrate import quad
    s = NoiseSpectrum(1e-10)
    f = T1Filter()
    w0 = f.omega_i[0]
    g = f.half_width
    edges = [0, w0 - 1000 * g, w0 - 10 * g, w0, w0 + 10 * g, w0 + 1000 * g, 1e13, np.inf]
    ref = sum(quad(lambda w: s(w) * f(w), a, b, limit=500, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:]))
    assert t1_overlap_integral(s, f) == pytest.approx(ref, rel=1e-7)


def test_coherence_function_zero_field():
    assert coherence_function_echo(BathParams(0.0, tau_c=1e-6), None, 1e-6) == 0.0


@given(st.floats(-9, -3), st.floats(-8, -4), st.floats(-8, -4))
def test_echo_exponent_matches_closed_form(log_tc, log_tau, log_b):
    bath = BathParams((10.0**log_b) ** 2, tau_c=10.0**log_tc)
    tau = 10.0**log_tau
    ref = closed_form_ou_echo(GAMMA_NV**2 * bath.B_rms_sq, bath.tau_c, tau)
    assert coherence_function_echo(bath, None, tau) == pytest.approx(ref, rel=1e-6)


@given(st.floats(-9, -3), st.floats(-7, -3))
def test_predicted_rates_scale_with_field(log_tc, log_b):
    b = 10.0**log_b
    p1 = predict_rates(BathParams(b * b, tau_c=10.0**log_tc), None, 1e-6)
    p2 = predict_rates(BathParams(4 * b * b, tau_c=10.0**log_tc), None, 1e-6)
    assert p2.bath_rates[0] == pytest.approx(4 * p1.bath_rates[0], rel=1e-9)
    assert p2.bath_rates[1] == pytest.approx(4 * p1.bath_rates[1], rel=1e-9)


def test_motional_narrowing_regime():
    p = predict_rates(BathParams((1e-4) ** 2, tau_c=1e-10), None, 1e-6)
    assert p.regime == "motional-narrowing"
    d2 = GAMMA_NV**2 * 1e-8
    # fast-noise echo rate Delta^2 tau_c
    assert 1 / p.T2 == pytest.approx(d2 * 1e-10, rel=1e-3)
    assert p.T2_chi == pytest.approx(p.T2_rate, rel=1e-3)


def test_slow_regime_uses_exponent():
    bath = BathParams((1e-6) ** 2, tau_c=1e-3)
    p = predict_rates(bath, None, 1e-6)
    assert p.regime == "non-exponential"
    assert coherence_function_echo(bath, None, p.T2) == pytest.approx(1.0, rel=1e-8)


def test_intrinsic_rates_add():
    bath = BathParams((1e-6) ** 2, tau_c=1e-6)
    p0 = predict_rates(bath, None, 1e-6)
    p = predict_rates(bath, None, 1e-6, intrinsic=(1 / 22e-3, 1 / 4e-6))
    assert 1 / p.T1 == pytest.approx(1 / p0.T1 + 1 / 22e-3)
    assert 1 / p.T2_rate == pytest.approx(1 / p0.T2_rate + 1 / 4e-6)
    with pytest.raises(DomainError):
        predict_rates(bath, None, 1e-6, intrinsic=(-1.0, 0.0))


def test_temperature_dependence_through_rate_model():
    bath = BathParams((1e-6) ** 2, rate_model=RelaxationRateModel.bulk_cobalt())
    p5 = predict_rates(bath, 5.0, 1e-6)
    p296 = predict_rates(bath, 296.0, 1e-6)
    assert p5.tau_c > p296.tau_c
    assert p296.regime == "motional-narrowing"


def test_decay_signal_and_curve():
    assert decay_signal(0.0, baseline=0.1, contrast=0.5) == pytest.approx(0.6)
    with pytest.raises(DomainError):
        decay_signal(1.0, contrast=1.5)
    bath = BathParams((2e-6) ** 2, tau_c=1e-6)
    t = np.linspace(0, 5e-6, 11)
    c = echo_decay_curve(bath, None, t, intrinsic_rate2=1e4)
    assert c[0] == 1.0 and np.all(np.diff(c) < 0)


def test_overlap_integral_matches_filter_module():
    s = NoiseSpectrum(3e-7)
    from nvbath.filters import echo_overlap
    assert echo_overlap_integral(s, 2e-6) == pytest.approx(echo_overlap(2e-6, s, corner=1 / 3e-7), rel=1e-9)
