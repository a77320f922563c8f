import math

import pytest
from hypothesis import given, strategies as st

from nvbath.errors import ConfigError, DomainError
from nvbath.units import (
    CM1_IN_J, GAMMA_NV, K_BOLTZMANN_CM1, convert_energy, parse_quantity,
    thermal_energy_ratio,
)


def test_codata_derived_constants():
    # h c * 100 and k_B / (h c 100) from exact SI definitions
    assert CM1_IN_J == pytest.approx(1.986445857e-23, rel=1e-9)
    assert K_BOLTZMANN_CM1 == pytest.approx(0.695034800, rel=1e-8)
    assert GAMMA_NV == pytest.approx(2 * math.pi * 28.024e9)


def test_energy_conversion_oracle():
    # 1 meV = 8.065543937 cm^-1 (CODATA 2018)
    assert convert_energy(1.0, "meV", "cm-1") == pytest.approx(8.065543937, rel=1e-9)
    assert convert_energy(230.0, "cm-1", "J") == pytest.approx(230 * 1.986445857e-23, rel=1e-9)


@given(st.floats(1e-3, 1e4), st.sampled_from(["J", "cm-1", "meV"]), st.sampled_from(["J", "cm-1", "meV"]))
def test_energy_round_trip(v, a, b):
    assert convert_energy(convert_energy(v, a, b), b, a) == pytest.approx(v, rel=1e-12)


def test_unknown_energy_unit():
    with pytest.raises(ConfigError):
        convert_energy(1.0, "eV", "J")


def test_thermal_ratio():
    E = 230 * CM1_IN_J
    assert thermal_energy_ratio(E, 296.0) == pytest.approx(230 / (K_BOLTZMANN_CM1 * 296.0))
    with pytest.raises(DomainError):
        thermal_energy_ratio(E, 0.0)


@pytest.mark.parametrize("text,kind,expected", [
    ("5 us", "time", 5e-6),
    ("0.35 ms", "time", 3.5e-4),
    ("20 G", "field", 2e-3),
    ("20 uT", "field", 2e-5),
    ("296 K", "temperature", 296.0),
    ("1 GHz", "frequency", 2e9 * math.pi),
    ("9.1e9 s-1", "rate", 9.1e9),
    ("8 nm", "length", 8e-9),
    ("10 mM", "concentration", 10.0),
    ("5 µs", "time", 5e-6),
])
def test_parse_quantity(text, kind, expected):
    assert parse_quantity(text, kind) == pytest.approx(expected)


@pytest.mark.parametrize("text,kind", [
    ("5", "time"), (5.0, "time"), ("5 G", "time"), ("-1 us", "time"), ("abc", "field"), ("1 s", "bogus"),
])
def test_parse_quantity_rejects(text, kind):
    with pytest.raises(ConfigError):
        parse_quantity(text, kind)
