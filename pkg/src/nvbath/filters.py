"""Filter functions of the Hahn-echo and relaxometry (T1) protocols.

Both filters are defined on omega >= 0 only; the one-sided noise
spectrum convention absorbs the negative-frequency mirror.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericalError
from .units import GAMMA_NV, OMEGA_NV_ZERO_FIELD

# below this omega*tau the echo filter switches to its Taylor series
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class EchoFilter:
    """Spin echo with total free evolution ``tau`` (pulse spacing tau/2)."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("echo tau must be positive")

    def __call__(self, omega):
        return echo_filter(self, omega)


@dataclass(frozen=True)
class T1Filter:
    """Pair of Lorentzian lines at the two NV spin transitions."""

    T2_star: float = 2e-6
    omega_i: tuple = field(default=(OMEGA_NV_ZERO_FIELD, OMEGA_NV_ZERO_FIELD))

    def __post_init__(self):
        if not self.T2_star > 0:
            raise DomainError("T2_star must be positive")
        if len(self.omega_i) != 2 or not all(w > 0 for w in self.omega_i):
            raise DomainError("omega_i must be two positive angular frequencies")
        object.__setattr__(self, "omega_i", tuple(float(w) for w in self.omega_i))

    @property
    def half_width(self):
        return 2 * math.pi / self.T2_star

    @classmethod
    def from_field(cls, B0, axis_projection=1.0, T2_star=2e-6):
        return cls(T2_star=T2_star, omega_i=resonance_from_field(B0, axis_projection))

    def __call__(self, omega):
        return t1_filter(self, omega)


def echo_filter(f, omega):
    """``(32/tau) sin^4(omega tau / 4) / omega^2``, with the omega -> 0 limit."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be non-negative")
    tau = f.tau
    x = w * tau
    small = x < _SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        full = (32.0 / tau) * np.sin(x / 4.0) ** 4 / w**2
    series = w**2 * tau**3 / 8.0 * (1.0 - x**2 / 24.0)
    out = np.where(small, series, full)
    return float(out) if out.ndim == 0 else out


def t1_filter(f, omega):
    """Sum of Lorentzians ``(4 pi/T2*) / ((2 pi/T2*)^2 + (omega - omega_i)^2)``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be non-negative")
    g = f.half_width
    out = sum(2.0 * g / (g * g + (w - wi) ** 2) for wi in f.omega_i)
    return float(out) if np.ndim(out) == 0 else out


def resonance_from_field(B0, axis_projection=1.0):
    """Return ``(omega_plus, omega_minus)`` in rad/s for a low axial field ``B0`` (T)."""
    if abs(B0) > 0.1:
        raise DomainError(f"|B0| = {abs(B0)} T outside the low-field range (<= 0.1 T)")
    if not -1.0 <= axis_projection <= 1.0:
        raise DomainError("axis_projection must lie in [-1, 1]")
    shift = GAMMA_NV * B0 * axis_projection
    tiny = np.finfo(float).tiny
    return (max(OMEGA_NV_ZERO_FIELD + shift, tiny), max(OMEGA_NV_ZERO_FIELD - shift, tiny))


def _check(val, err, what, diagnostics):
    if not np.isfinite(val):
        raise NumericalError(f"{what}: non-finite quadrature result", diagnostics)
    return val, err


def _tail(fn, a, epsrel):
    # int_a^inf fn(w) dw with w = 1/u; QUADPACK never evaluates the u = 0 endpoint
    return quad(lambda u: fn(1.0 / u) / (u * u), 0.0, 1.0 / a, epsabs=0.0, epsrel=epsrel, limit=200)


def _fourier_tail(h, a, wvar, tol, diag):
    # int_a^inf h(w) cos(wvar w) dw by QUADPACK's Fourier routine. If its cycle
    # extrapolation stalls, the first cycles are integrated directly and the
    # Fourier routine restarts further out.
    period = 2 * math.pi / wvar
    head = 0.0
    for n_cycles in (0, 8, 64):
        b = a + n_cycles * period
        if n_cycles:
            head, _ = quad(lambda w: h(w) * math.cos(wvar * w), a, b, epsabs=tol, limit=50 * n_cycles)
        out = quad(h, b, np.inf, weight="cos", wvar=wvar, epsabs=tol, limlst=200, limit=200, full_output=1)
        if len(out) == 3:  # no error flag
            return head + out[0], out[1]
    raise NumericalError("echo overlap: Fourier tail did not converge", dict(diag, wvar=wvar))


def echo_overlap(tau, weight=None, corner=None, epsrel=1e-11):
    """``int_0^inf weight(w) F2(w; tau) dw`` for a smooth, non-oscillating weight.

    The interval is split at ``w_a = 2 pi / tau``. Below it the sin^4 form is
    integrated directly. Above it ``sin^4`` is expanded as
    ``(3 - 4 cos(w tau/2) + cos(w tau)) / 8`` and the two cosine pieces are
    handled by QUADPACK's Fourier-integral routine on [w_a, inf), which is
    robust for the slowly decaying oscillatory tail.

    ``corner`` is an optional characteristic frequency of ``weight`` used as
    an extra breakpoint for the non-oscillating part.
    """
    if weight is None:
        def weight(w):
            return 1.0
    EchoFilter(tau)  # validates tau
    w_a = 2 * math.pi / tau
    diag = {"tau": tau, "corner": corner}

    c32 = 32.0 / tau

    def inner(w):
        x = w * tau
        if x < _SERIES_CUTOFF:
            return weight(w) * w * w * tau**3 / 8.0 * (1.0 - x * x / 24.0)
        return weight(w) * c32 * math.sin(0.25 * x) ** 4 / (w * w)

    pts_lo = [0.0, w_a]
    if corner is not None and 0 < corner < w_a:
        pts_lo = sorted({0.0, corner, w_a} | {c for c in (corner * 0.1, corner * 10) if c < w_a})
    low = 0.0
    for a, b in zip(pts_lo[:-1], pts_lo[1:]):
        v, e = quad(inner, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        low += _check(v, e, "echo overlap (low band)", diag)[0]

    def h(w):
        return weight(w) * (4.0 / tau) / (w * w)

    # absolute floor for the tail pieces, relative to their natural scale
    tol = epsrel * 1e-2 * abs(h(w_a)) * w_a + 1e-300

    # non-oscillating part: 3 * int h, integrated in u = 1/w where
    # (4/tau) weight(w)/w^2 dw becomes the bounded (4/tau) weight(1/u) du
    def h_u(u):
        return weight(1.0 / u) if u > 0 else 0.0

    u_a = 1.0 / w_a
    pts_u = [0.0, u_a]
    if corner is not None and corner > w_a:
        pts_u = sorted({0.0, u_a} | {1.0 / c for c in (corner * 0.1, corner, corner * 10) if c > w_a})
    flat = 0.0
    for a, b in zip(pts_u[:-1], pts_u[1:]):
        v, e = quad(h_u, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        flat += _check(v, e, "echo overlap (flat band)", diag)[0]
    flat *= 4.0 / tau

    osc = 0.0
    for coef, wvar in ((-4.0, tau / 2.0), (1.0, tau)):
        v, e = _fourier_tail(h, w_a, wvar, tol, diag)
        osc += coef * _check(v, e, "echo overlap (Fourier tail)", diag)[0]

    return low + 3.0 * flat + osc


def echo_filter_integral(f):
    """Numerical ``int_0^inf F2 dw``; analytically ``2 pi`` for any tau."""
    return echo_overlap(f.tau)


def lorentzian_overlap(f, weight=None, corner=None, epsrel=1e-11):
    """``int_0^inf weight(w) F1(w) dw`` with breakpoints at the line centres.

    ``weight`` defaults to 1, giving the filter area.
    """
    if weight is None:
        def weight(w):
            return 1.0
    g = f.half_width

    w_p, w_m = f.omega_i
    gg, two_g = g * g, 2.0 * g

    def integrand(w):
        return weight(w) * (two_g / (gg + (w - w_p) ** 2) + two_g / (gg + (w - w_m) ** 2))

    pts = {0.0}
    for wi in f.omega_i:
        for k in (-1e3, -30.0, -3.0, 0.0, 3.0, 30.0, 1e3):
            p = wi + k * g
            if p > 0:
                pts.add(p)
    if corner is not None:
        for c in (corner * 0.1, corner, corner * 10.0):
            pts.add(c)
    # decade breakpoints keep each segment within one order of magnitude
    lo = min(p for p in pts if p > 0)
    hi = max(pts)
    pts |= set(np.geomspace(lo, hi, int(np.ceil(np.log10(hi / lo))) + 1)[1:-1])
    pts = sorted(pts)
    total = 0.0
    diag = {"T2_star": f.T2_star, "omega_i": f.omega_i, "corner": corner}
    # rough magnitude of the integral sets an absolute floor for near-empty segments
    est = max(max(integrand(a), integrand(0.5 * (a + b))) * (b - a) for a, b in zip(pts[:-1], pts[1:]))
    tol = epsrel * 1e-3 * est
    for a, b in zip(pts[:-1], pts[1:]):
        v, e = quad(integrand, a, b, epsabs=tol, epsrel=epsrel, limit=200)
        total += _check(v, e, "T1 overlap", diag)[0]
    v, e = _tail(integrand, pts[-1], epsrel)
    total += _check(v, e, "T1 overlap (tail)", diag)[0]
    return total


def t1_filter_integral(f):
    return lorentzian_overlap(f)
