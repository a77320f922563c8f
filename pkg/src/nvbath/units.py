"""Physical constants and unit conversions.

Everything inside the package is SI: seconds, tesla, kelvin, joules and
rad/s. Human-facing units (microseconds, gauss, cm^-1, GHz, ...) are only
accepted and produced at the boundary through :func:`parse_quantity` and
:func:`convert_energy`.

Constants are CODATA 2018 exact or recommended values.
"""

import math
import re
from dataclasses import dataclass

from .errors import ConfigError, DomainError

# CODATA 2018
H_PLANCK = 6.62607015e-34  # J s
C_LIGHT = 299792458.0  # m/s
K_BOLTZMANN = 1.380649e-23  # J/K
E_CHARGE = 1.602176634e-19  # C
MU_0 = 1.25663706212e-6  # T m / A
N_AVOGADRO = 6.02214076e23  # 1/mol
MU_BOHR = 9.2740100783e-24  # J/T

#: energy of one wavenumber (cm^-1) in joules
CM1_IN_J = H_PLANCK * C_LIGHT * 100.0
#: energy of one meV in joules
MEV_IN_J = E_CHARGE * 1e-3
#: Boltzmann constant in cm^-1 / K (~0.6950348)
K_BOLTZMANN_CM1 = K_BOLTZMANN / CM1_IN_J


@dataclass(frozen=True)
class Constants:
    k_B: float = K_BOLTZMANN
    k_B_cm1: float = K_BOLTZMANN_CM1
    gamma_nv: float = 2 * math.pi * 28.024e9  # rad s^-1 T^-1
    omega_nv_zero_field: float = 2 * math.pi * 2.870e9  # rad/s
    mu_0: float = MU_0
    mu_B: float = MU_BOHR
    N_A: float = N_AVOGADRO


CONSTANTS = Constants()
GAMMA_NV = CONSTANTS.gamma_nv
OMEGA_NV_ZERO_FIELD = CONSTANTS.omega_nv_zero_field

_ENERGY_SCALE = {
    "J": 1.0,
    "cm-1": CM1_IN_J,
    "meV": MEV_IN_J,
}


def convert_energy(value, from_unit, to_unit):
    """Convert an energy between J, cm-1 and meV.

    >>> round(convert_energy(230, "cm-1", "meV"), 2)
    28.52
    """
    try:
        a = _ENERGY_SCALE[from_unit]
        b = _ENERGY_SCALE[to_unit]
    except KeyError as err:
        raise ConfigError(f"unknown energy unit {err.args[0]!r}") from None
    if a == b:
        return value
    return value * a / b


def thermal_energy_ratio(E_a, T):
    """Return ``E_a / (k_B T)`` for ``E_a`` in joules and ``T`` in kelvin."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T!r}")
    return E_a / (K_BOLTZMANN * T)


# kind -> {suffix: factor to SI}
_UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "field": {"T": 1.0, "mT": 1e-3, "uT": 1e-6, "G": 1e-4},
    "temperature": {"K": 1.0},
    "energy": {"J": 1.0, "cm-1": CM1_IN_J, "meV": MEV_IN_J},
    # ordinary frequency in, angular frequency out
    "frequency": {"Hz": 2 * math.pi, "kHz": 2e3 * math.pi,
                  "MHz": 2e6 * math.pi, "GHz": 2e9 * math.pi},
    "rate": {"s-1": 1.0, "1/s": 1.0, "ms-1": 1e3, "us-1": 1e6},
    "length": {"m": 1.0, "um": 1e-6, "nm": 1e-9},
    "concentration": {"mol/m3": 1.0, "M": 1e3, "mM": 1.0, "uM": 1e-3},
}

_NONNEGATIVE = {"time", "temperature", "length", "concentration", "rate"}

_QTY_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")


def parse_quantity(text, kind):
    """Parse ``"<number> <unit>"`` into an SI float for the given kind.

    Bare numbers are rejected so that every physical value in a config
    file states its unit.
    """
    if kind not in _UNITS:
        raise ConfigError(f"unknown quantity kind {kind!r}")
    if not isinstance(text, str):
        raise ConfigError(f"expected a {kind} string with unit suffix, got {text!r}")
    m = _QTY_RE.match(text.replace("µ", "u").replace("μ", "u"))
    if m is None:
        raise ConfigError(f"cannot parse {kind} quantity {text!r}")
    number, unit = m.groups()
    try:
        factor = _UNITS[kind][unit]
    except KeyError:
        allowed = ", ".join(_UNITS[kind])
        raise ConfigError(f"unit {unit!r} not valid for {kind} (allowed: {allowed})") from None
    value = float(number) * factor
    if kind in _NONNEGATIVE and value < 0:
        raise ConfigError(f"negative {kind} {text!r}")
    return value


def format_quantity(value, unit, kind):
    return value / _UNITS[kind][unit]


def gauss_to_tesla(b):
    return b * 1e-4


def tesla_to_gauss(b):
    return b * 1e4


def hz_to_rad(f):
    return 2 * math.pi * f


def rad_to_hz(w):
    return w / (2 * math.pi)
