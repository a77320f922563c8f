import json
import math

import numpy as np
import pytest

from nvbath.errors import ConfigError, DataError
from nvbath.io import (
    load_config, quantity, read_curve_csv, read_curve_metadata, validate_config, write_csv, write_json,
)


def test_schema_accepts_minimal():
    validate_config({"schema": 1, "bath": {"tau_c": "5 us", "B_rms": "2 uT"}})


@pytest.mark.parametrize("doc,pointer", [
    ({"schema": 2}, "/schema"),
    ({"bath": {"tau_c": 5}}, "/bath/tau_c"),
    ({"bath": {"tauc": "5 us"}}, "/bath"),
    ({"mc": {"seed": -1}}, "/mc/seed"),
    ({"fit": {"mode": "guess"}}, "/fit/mode"),
])
def test_schema_rejects_with_pointer(doc, pointer):
    with pytest.raises(ConfigError) as err:
        validate_config(doc)
    assert err.value.pointer == pointer


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_quantity_pointer():
    with pytest.raises(ConfigError) as err:
        quantity({"T2_star": "2 parsecs"}, "T2_star", "time", "/filters")
    assert err.value.pointer == "/filters/T2_star"
    assert quantity({}, "x", "time", "/a", default=1.0) == 1.0


def test_json_output_sorted_and_clean(tmp_path):
    p = tmp_path / "out.json"
    write_json(p, "predict", {"b": 1, "a": 2}, {"x": np.float64(1.5), "inf": math.inf, "arr": np.arange(2)})
    doc = json.loads(p.read_text())
    assert doc["result"] == {"arr": [0, 1], "inf": None, "x": 1.5}
    assert doc["tool"] == "nvbath" and doc["command"] == "predict"
    assert list(doc) == sorted(doc)


def test_csv_round_trip(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(p, ["t_us", "signal", "sigma"], [(0.0, 1.0, 0.01), (1.5, 0.5, 0.01)])
    t, y, s = read_curve_csv(p)
    np.testing.assert_allclose(t, [0.0, 1.5e-6])
    np.testing.assert_allclose(y, [1.0, 0.5])
    np.testing.assert_allclose(s, [0.01, 0.01])


@pytest.mark.parametrize("text", ["", "time,signal\n1,2\n", "t_us,signal\n1,x\n", "t_us,signal\n1\n"])
def test_csv_rejects(tmp_path, text):
    p = tmp_path / "c.csv"
    p.write_text(text)
    with pytest.raises(DataError):
        read_curve_csv(p)


def test_metadata(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"nv_id": "NV24", "kind": "T1", "temperature": "5 K", "field": "20 G"}))
    md = read_curve_metadata(p)
    assert md == {"nv_id": "NV24", "kind": "T1", "temperature_K": 5.0, "field_T": pytest.approx(2e-3)}
    assert read_curve_metadata(tmp_path / "none.json") == {}
    p.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError):
        read_curve_metadata(p)
