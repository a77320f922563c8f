import json

import numpy as np
import pytest

from nvbath.cli import main
from nvbath.inference import stretched_exp
from nvbath.io import write_csv


def run(tmp_path, cmd, cfg, *extra):
    c = tmp_path / f"{cmd}.json"
    c.write_text(json.dumps({"schema": 1, **cfg}))
    out = tmp_path / f"out_{cmd}"
    return main([cmd, "--config", str(c), "--out", str(out), *extra]), out


def load(path):
    return json.loads(path.read_text())["result"]


def test_nsd(tmp_path):
    code, out = run(tmp_path, "nsd", {"bath": {"rate_model": "bulk"}, "nsd": {"temperatures": ["5 K", "296 K"]}})
    assert code == 0
    res = load(out / "nsd.json")["spectra"]
    assert res[1]["ghz_range_cutoff_rad_s"] and not res[0]["ghz_range_cutoff_rad_s"]
    lines = (out / "nsd.csv").read_text().splitlines()
    assert lines[0] == "omega_rad_s,S_5K,S_296K" and lines[1].startswith("0.0,")


def test_predict_with_comparison(tmp_path):
    cfg = {"bath": {"tau_c": "5 us", "B_rms": "20 uT"}, "filters": {"echo_tau": "0.8 us"},
           "intrinsic": {"T1": "22 ms", "T2": "4 us"}, "measured": {"T1": "0.35 ms", "T2": "0.8 us"}}
    code, out = run(tmp_path, "predict", cfg)
    assert code == 0
    res = load(out / "prediction.json")
    assert set(res["comparison"]) == {"T1", "T2"}
    assert (out / "decay.csv").read_text().startswith("t_us,echo\n")


def test_predict_sweep(tmp_path):
    cfg = {"bath": {"rate_model": "bulk", "B_rms": "5 uT"}, "filters": {"echo_tau": "1 us", "B0": "20 G"},
           "sweep": {"temperatures": ["5 K", "50 K", "296 K"]}}
    code, out = run(tmp_path, "predict", cfg)
    assert code == 0
    rows = load(out / "prediction.json")["predictions"]
    assert [r["temperature_K"] for r in rows] == [5.0, 50.0, 296.0]
    assert rows[2]["regime"] == "motional-narrowing"


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "predict", {"bath": {"tau_c": "5"}})
    assert code == 2
    assert "ConfigError" in capsys.readouterr().err


def test_missing_temperature_is_config_error(tmp_path):
    code, _ = run(tmp_path, "predict", {"bath": {"rate_model": "bulk", "B_rms": "1 uT"},
                                        "filters": {"echo_tau": "1 us"}})
    assert code == 2


def test_domain_error_exit_code(tmp_path):
    code, _ = run(tmp_path, "geometry", {"geometry": {"cap_radius": "20 nm", "cap_height": "20 nm",
                                                      "concentration": "1 mM", "nv_depth": "0 nm"}})
    assert code == 2


def test_simulate_deterministic(tmp_path):
    cfg = {"mc": {"tau_c": "1 us", "delta": "100 kHz", "dt": "0.01 us", "n_trajectories": 600,
                  "taus": ["1 us", "2 us"], "dump_trajectory": True}}
    code1, out1 = run(tmp_path, "simulate", cfg, "--seed", "11")
    b1 = [(out1 / f).read_bytes() for f in ("simulate.json", "simulate.csv", "trajectory.csv")]
    code2, out2 = run(tmp_path, "simulate", cfg, "--seed", "11")
    b2 = [(out2 / f).read_bytes() for f in ("simulate.json", "simulate.csv", "trajectory.csv")]
    assert code1 == code2 == 0 and b1 == b2
    assert load(out1 / "simulate.json")["resolved"]["seed"] == 11
    _, out3 = run(tmp_path, "simulate", cfg, "--seed", "12")
    assert (out3 / "simulate.csv").read_bytes() != b1[1]


def test_simulate_zero_field(tmp_path):
    code, out = run(tmp_path, "simulate", {"mc": {"preset": "zero-field"}})
    assert code == 0
    assert load(out / "simulate.json")["mean_signal"] == [1.0, 1.0, 1.0]


def test_geometry(tmp_path):
    cfg = {"geometry": {"cap_radius": "20 nm", "cap_height": "20 nm", "concentration": "10 mM",
                        "target_count": 240, "dipolar": True, "n_samples": 20000}}
    code, out = run(tmp_path, "geometry", cfg)
    res = load(out / "geometry.json")
    assert code == 0 and res["molecule_count"] < 240 and "note" in res
    assert res["dipolar"]["assumptions"]


def _write_curve(d, name, T_char, beta, md):
    t = np.linspace(0, 3 * T_char, 30)
    write_csv(d / f"{name}.csv", ["t_us", "signal"], zip(t * 1e6, stretched_exp(t, 0.8, T_char, beta, 0.1)))
    (d / f"{name}.json").write_text(json.dumps(md))


def test_fit_decay_and_empty_dir(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    code, _ = run(tmp_path, "fit", {"fit": {"mode": "decay"}}, "--data", str(data))
    assert code == 3
    _write_curve(data, "a", 5e-6, 1.3, {"kind": "T2"})
    code, out = run(tmp_path, "fit", {"fit": {"mode": "decay"}}, "--data", str(data))
    assert code == 0
    assert load(out / "fit.json")["fits"]["a"]["params"]["T_char"] == pytest.approx(5e-6, rel=1e-6)
    assert (out / "residuals_a.csv").exists()


def test_fit_extract(tmp_path):
    from nvbath.noise import BathParams
    from nvbath.relaxation import predict_rates
    p = predict_rates(BathParams((3e-6) ** 2, tau_c=5e-6), None, 1e-6, intrinsic=(1 / 22e-3, 1 / 4e-6))
    data = tmp_path / "data"
    data.mkdir()
    for kind, smm, T in (("T1", True, p.T1), ("T2", True, p.T2_rate), ("T1", False, 22e-3), ("T2", False, 4e-6)):
        _write_curve(data, f"nv1_{kind}_{int(smm)}", T, 1.0, {"nv_id": "nv1", "kind": kind, "smm_present": smm})
    code, out = run(tmp_path, "fit", {"fit": {"mode": "extract", "echo_tau": "1 us"}}, "--data", str(data))
    assert code == 0
    ex = load(out / "fit.json")["extractions"]["nv1"]
    assert ex["tau_c_s"] == pytest.approx(5e-6, rel=1e-4)


def test_fit_rate_model(tmp_path):
    from nvbath.noise import RelaxationRateModel, correlation_time
    bulk = RelaxationRateModel.bulk_cobalt()
    pts = [[f"{T} K", f"{correlation_time(bulk, T) * 1e6!r} us"] for T in (5, 10, 20, 40, 80, 160, 296)]
    code, out = run(tmp_path, "fit", {"fit": {"mode": "rate_model", "points": pts}})
    assert code == 0
    assert load(out / "fit.json")["rate_model"]["n"] == pytest.approx(3.65, rel=1e-5)


def test_fit_table(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    for i, (field, temp, T2) in enumerate([("0 G", "5 K", 5e-6), ("1000 G", "5 K", 6e-6)]):
        _write_curve(data, f"c{i}", T2, 1.2, {"nv_id": f"c{i}", "kind": "T2", "temperature": temp, "field": field})
    code, out = run(tmp_path, "fit", {"fit": {"mode": "table"}}, "--data", str(data))
    assert code == 0
    assert load(out / "fit.json")["comparison"]["relative_increase"] == pytest.approx(0.2, rel=1e-4)
    assert (out / "t2_table.csv").read_text().startswith("nv_id,temperature_K,field_G")
