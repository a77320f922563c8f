"""Coherence decay and relaxation rates from NSD/filter overlaps.

The echo filter ``F2 = (32/tau) sin^4(w tau/4) / w^2`` integrates to a *rate*
against the unit-area one-sided spectrum. With ``Delta^2 = gamma^2 <B^2>``
the decay exponent of a Hahn echo of length ``tau`` is::

    chi(tau) = KAPPA * Delta^2 * tau * int_0^inf S(w) F2(w; tau) dw

``KAPPA`` is the single convention constant that reconciles the (2/pi)
spectrum prefactor and the 32/tau filter prefactor with the exact
Ornstein-Uhlenbeck echo result :func:`closed_form_ou_echo`. It is fixed
once (:func:`calibrate_kappa`) and the same constant multiplies both the
T1 and the T2 overlap rates.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError
from .filters import T1Filter, echo_overlap, lorentzian_overlap
from .noise import NoiseSpectrum
from .units import GAMMA_NV

KAPPA = 0.25

# tau_c / T2 below this counts as the motional-narrowing (exponential) regime
_FAST_NOISE_RATIO = 0.1


def delta_sq(B_rms_sq, gamma=GAMMA_NV):
    return gamma * gamma * B_rms_sq


def _scalar_nsd(spectrum):
    # plain-float Lorentzian for the quadrature inner loop
    tc = spectrum.tau_c
    peak = 2.0 * tc / math.pi

    def S(w):
        u = tc * w
        return peak / (1.0 + u * u)
    return S


def echo_overlap_integral(spectrum, tau):
    """``int_0^inf S(w) F2(w; tau) dw`` in 1/s."""
    return echo_overlap(tau, _scalar_nsd(spectrum), corner=1.0 / spectrum.tau_c)


def t1_overlap_integral(spectrum, t1f):
    """``int_0^inf S(w) F1(w) dw`` in 1/s."""
    return lorentzian_overlap(t1f, _scalar_nsd(spectrum), corner=1.0 / spectrum.tau_c)


def _ou_shape(x):
    # x - 3 + 4 exp(-x/2) - exp(-x); the power series avoids cancellation for small x
    if x < 1.0:
        total, k, term = 0.0, 3, x**3 / 6.0
        while True:
            add = (-1) ** k * term * (2.0 ** (2 - k) - 1.0)
            total += add
            if abs(add) < 1e-18 * abs(total):
                return total
            k += 1
            term *= x / k
    return x - 3.0 + 4.0 * math.exp(-x / 2.0) - math.exp(-x)


def closed_form_ou_echo(Delta_sq, tau_c, t):
    """Exact Hahn-echo decay exponent for Ornstein-Uhlenbeck frequency noise.

    ``chi = Delta^2 tau_c^2 [x - 3 + 4 e^{-x/2} - e^{-x}]`` with ``x = t/tau_c``.
    Accepts scalar or array ``t``.
    """
    if Delta_sq < 0 or not tau_c > 0:
        raise DomainError("Delta_sq must be >= 0 and tau_c > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    shape = np.vectorize(_ou_shape, otypes=[float])(t_arr / tau_c)
    out = Delta_sq * tau_c**2 * shape
    return float(out) if out.ndim == 0 else out


def calibrate_kappa(tau_c, tau):
    """Ratio of the closed-form echo exponent to ``Delta^2 tau int S F2``.

    Any ``(tau_c, tau)`` pair gives the same value; the fast-noise limit
    ``tau_c << tau`` is the conventional calibration point.
    """
    spectrum = NoiseSpectrum(tau_c)
    return closed_form_ou_echo(1.0, tau_c, tau) / (tau * echo_overlap_integral(spectrum, tau))


def coherence_function_echo(bath, T, tau, gamma=GAMMA_NV):
    """Bath-induced echo decay exponent chi at total evolution time ``tau``."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    if bath.B_rms_sq == 0:
        return 0.0
    spectrum = bath.spectrum(T)
    return KAPPA * delta_sq(bath.B_rms_sq, gamma) * tau * echo_overlap_integral(spectrum, tau)


def decay_signal(chi, baseline=0.0, contrast=1.0):
    """``baseline + contrast * exp(-chi)``."""
    if not 0 < contrast <= 1:
        raise DomainError("contrast must lie in (0, 1]")
    if baseline < 0:
        raise DomainError("baseline must be non-negative")
    return baseline + contrast * np.exp(-np.asarray(chi, dtype=float))


@dataclass
class RelaxationPrediction:
    T1: float
    T2: float
    T2_rate: float
    T2_chi: float
    regime: str
    tau_c: float
    echo_tau: float
    intrinsic_rates: tuple
    bath_rates: tuple
    overlap_integrals: tuple

    def to_dict(self):
        return asdict(self)


def _t2_from_chi(bath, T, rate2_int, t_guess, gamma):
    # time at which intrinsic + bath-induced echo exponent reaches 1
    def g(t):
        return t * rate2_int + coherence_function_echo(bath, T, t, gamma) - 1.0

    lo, hi = t_guess, t_guess
    while g(lo) > 0:
        lo /= 4.0
    while g(hi) < 0:
        hi *= 4.0
        if hi > 1e6:
            raise NumericalError("echo exponent never reaches 1", {"t_guess": t_guess})
    return brentq(g, lo, hi, xtol=1e-14 * hi, rtol=1e-12)


def predict_rates(bath, T, echo_tau, t1f=None, intrinsic=(0.0, 0.0), gamma=GAMMA_NV):
    """Predict T1 and T2 of the sensor coupled to ``bath`` at temperature ``T``.

    ``intrinsic`` holds the bath-free rates ``(1/T1_int, 1/T2_int)`` in 1/s.
    ``T2_rate`` is the overlap rate evaluated with the echo filter at
    ``echo_tau``; ``T2_chi`` is where the total echo exponent reaches 1. The
    reported ``T2`` is ``T2_rate`` in the motional-narrowing regime and
    ``T2_chi`` otherwise.
    """
    if t1f is None:
        t1f = T1Filter()
    rate1_int, rate2_int = (float(r) for r in intrinsic)
    if rate1_int < 0 or rate2_int < 0:
        raise DomainError("intrinsic rates must be non-negative")
    tau_c = bath.correlation_time(T)
    spectrum = NoiseSpectrum(tau_c)
    ov2 = echo_overlap_integral(spectrum, echo_tau)
    ov1 = t1_overlap_integral(spectrum, t1f)
    d2 = delta_sq(bath.B_rms_sq, gamma)
    bath1 = KAPPA * d2 * ov1
    bath2 = KAPPA * d2 * ov2
    rate1 = rate1_int + bath1
    rate2 = rate2_int + bath2
    T1 = 1.0 / rate1 if rate1 > 0 else math.inf
    T2_rate = 1.0 / rate2 if rate2 > 0 else math.inf

    if bath2 == 0:
        T2_chi = T2_rate
    else:
        guess = T2_rate if math.isfinite(T2_rate) else echo_tau
        T2_chi = _t2_from_chi(bath, T, rate2_int, guess, gamma)
    fast = tau_c <= _FAST_NOISE_RATIO * T2_chi
    regime = "motional-narrowing" if fast else "non-exponential"
    return RelaxationPrediction(
        T1=T1,
        T2=T2_rate if fast else T2_chi,
        T2_rate=T2_rate,
        T2_chi=T2_chi,
        regime=regime,
        tau_c=tau_c,
        echo_tau=echo_tau,
        intrinsic_rates=(rate1_int, rate2_int),
        bath_rates=(bath1, bath2),
        overlap_integrals=(ov1, ov2),
    )


def echo_decay_curve(bath, T, times, intrinsic_rate2=0.0, gamma=GAMMA_NV):
    """Echo coherence ``exp(-t/T2_int - chi(t))`` on a time grid."""
    times = np.asarray(times, dtype=float)
    chi = np.array([coherence_function_echo(bath, T, t, gamma) if t > 0 else 0.0 for t in times])
    return np.exp(-chi - times * intrinsic_rate2)
