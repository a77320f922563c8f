"""Correlation-time model and Lorentzian noise spectrum of the spin bath.

The bath field is an Ornstein-Uhlenbeck process with autocorrelation
``<B^2> exp(-t / tau_c)``. Its spectrum is used in the one-sided,
unit-area convention::

    S(w) = (2/pi) tau_c / (1 + tau_c^2 w^2),    int_0^inf S dw = 1

so the mean-square field ``<B^2>`` is carried separately.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .units import K_BOLTZMANN, convert_energy


@dataclass(frozen=True)
class RelaxationRateModel:
    """Raman + Orbach relaxation rate ``C T^n + tau0_inv exp(-E_a / k_B T)``.

    ``C`` carries implicit units of s^-1 K^-n; ``E_a`` is in joules.
    """

    C: float
    n: float
    tau0_inv: float
    E_a: float

    def __post_init__(self):
        if self.C < 0 or self.tau0_inv < 0:
            raise DomainError("C and tau0_inv must be non-negative")
        if not self.n > 0:
            raise DomainError("Raman exponent n must be positive")
        if self.C == 0 and self.tau0_inv == 0:
            raise DomainError("at least one of C, tau0_inv must be positive")
        if self.E_a < 0:
            raise DomainError("energy barrier must be non-negative")

    @classmethod
    def bulk_cobalt(cls):
        """Bulk-powder parameters of the Co(II) complex (E_a = 230 cm^-1)."""
        return cls(C=0.088, n=3.65, tau0_inv=9.1e9, E_a=convert_energy(230.0, "cm-1", "J"))

    def raman_rate(self, T):
        return self.C * np.power(T, self.n)

    def orbach_rate(self, T):
        return self.tau0_inv * np.exp(-self.E_a / (K_BOLTZMANN * np.asarray(T, dtype=float)))

    def rate(self, T):
        return self.raman_rate(T) + self.orbach_rate(T)


def correlation_time(model, T):
    """Bath correlation time at temperature ``T`` (K), in seconds."""
    T_arr = np.asarray(T, dtype=float)
    if np.any(~(T_arr > 0)):
        raise DomainError(f"temperature must be positive, got {T!r}")
    rate = model.rate(T_arr)
    if np.any(~(rate > 0)) or np.any(~np.isfinite(rate)):
        raise NumericalError("total relaxation rate underflows; tau_c is unbounded",
                             {"T": T_arr.tolist()})
    tau = 1.0 / rate
    return float(tau) if np.ndim(tau) == 0 else tau


@dataclass(frozen=True)
class BathParams:
    """Spin-bath description: mean-square field plus either a rate model or a fixed tau_c."""

    B_rms_sq: float
    rate_model: RelaxationRateModel = None
    tau_c: float = None

    def __post_init__(self):
        if not self.B_rms_sq >= 0:
            raise DomainError("B_rms_sq must be non-negative")
        if (self.rate_model is None) == (self.tau_c is None):
            raise DomainError("exactly one of rate_model and tau_c must be given")
        if self.tau_c is not None and not self.tau_c > 0:
            raise DomainError("tau_c must be positive")

    def correlation_time(self, T=None):
        if self.tau_c is not None:
            return self.tau_c
        if T is None:
            raise DomainError("temperature required when the bath uses a rate model")
        return correlation_time(self.rate_model, T)

    def spectrum(self, T=None):
        return NoiseSpectrum(self.correlation_time(T))


def autocorrelation(bath, T, t):
    """``<B(0) B(t)>`` in T^2."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("lag must be non-negative")
    tau_c = bath.correlation_time(T)
    out = bath.B_rms_sq * np.exp(-t / tau_c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoiseSpectrum:
    tau_c: float

    def __post_init__(self):
        if not self.tau_c > 0:
            raise DomainError("tau_c must be positive")

    def __call__(self, omega):
        return nsd(self, omega)

    @property
    def peak(self):
        return 2.0 * self.tau_c / math.pi


def nsd(spectrum, omega):
    """One-sided normalized spectral density in s/rad."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be non-negative")
    tc = spectrum.tau_c
    out = (2.0 / math.pi) * tc / (1.0 + (tc * w) ** 2)
    return float(out) if out.ndim == 0 else out


def cutoff_frequency(spectrum):
    """Lorentzian corner ``1/tau_c`` in rad/s."""
    return 1.0 / spectrum.tau_c


def nsd_integral(spectrum, rtol=1e-10):
    """Integrate :func:`nsd` over [0, inf) numerically.

    Adaptive quadrature in the scaled variable ``x = tau_c w`` up to ``x_max``
    plus the analytic Lorentzian tail ``(2/pi) / x_max``.
    """
    from scipy.integrate import quad

    tc = spectrum.tau_c
    x_max = 1e4
    body = 0.0
    edges = [0.0, 1.0, 10.0, 100.0, 1e3, x_max]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda x: nsd(spectrum, x / tc) / tc, a, b, epsabs=0.0, epsrel=rtol)
        body += val
    # int_{x_max}^inf (2/pi) dx / (1 + x^2) = (2/pi) (pi/2 - atan x_max)
    tail = (2.0 / math.pi) * math.atan(1.0 / x_max)
    return body + tail
