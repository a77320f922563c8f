"""Command-line front end.

Usage::

    nvbath <nsd|predict|fit|simulate|geometry> --config run.json [--data DIR] [--out DIR] [--seed N]

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical or fit error.
"""

import argparse
import copy
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, NVBathError, exit_code_for
from .filters import T1Filter, resonance_from_field
from .geometry import DEFAULT_MOMENT_MUB, SensingGeometry, dipolar_b_rms, implied_volume
from .inference import (
    BETA_BOUNDS, DecayCurve, extract_bath, fit_decay, fit_rate_model, stretched_exp,
    t2_vs_temperature_table, weighted_mean,
)
from .io import load_config, quantity, read_curve_csv, read_curve_metadata, write_csv, write_json
from .montecarlo import TrajectoryConfig, dump_trajectory_csv, simulate_echo_decay
from .noise import BathParams, NoiseSpectrum, RelaxationRateModel, cutoff_frequency, nsd
from .relaxation import closed_form_ou_echo, echo_decay_curve, predict_rates
from .units import GAMMA_NV, parse_quantity

log = logging.getLogger("nvbath")


# --- config helpers ---------------------------------------------------------

def _block(cfg, name):
    if name not in cfg:
        raise ConfigError(f"missing required block {name!r}", pointer="/")
    return cfg[name]


def _rate_model(block, ptr):
    if block == "bulk":
        return RelaxationRateModel.bulk_cobalt()
    return RelaxationRateModel(
        C=float(block["C"]), n=float(block["n"]),
        tau0_inv=quantity(block, "tau0_inv", "rate", ptr),
        E_a=quantity(block, "E_a", "energy", ptr),
    )


def parse_bath(cfg, require_field=True):
    b = _block(cfg, "bath")
    if ("tau_c" in b) == ("rate_model" in b):
        raise ConfigError("exactly one of tau_c and rate_model is required", pointer="/bath")
    B_rms = quantity(b, "B_rms", "field", "/bath", default=None if require_field else 0.0)
    if "tau_c" in b:
        return BathParams(B_rms * B_rms, tau_c=quantity(b, "tau_c", "time", "/bath"))
    return BathParams(B_rms * B_rms, rate_model=_rate_model(b["rate_model"], "/bath/rate_model"))


def parse_temperatures(cfg, bath):
    if "sweep" in cfg:
        return [parse_quantity(t, "temperature") for t in cfg["sweep"]["temperatures"]]
    b = cfg.get("bath", {})
    if "temperature" in b:
        return [quantity(b, "temperature", "temperature", "/bath")]
    if bath.rate_model is not None:
        raise ConfigError("a temperature is required with a rate model", pointer="/bath")
    return [None]


def parse_t1_filter(cfg):
    f = cfg.get("filters", {})
    T2_star = quantity(f, "T2_star", "time", "/filters", default=2e-6)
    if "resonances" in f:
        w = tuple(parse_quantity(x, "frequency") for x in f["resonances"])
    elif "B0" in f:
        w = resonance_from_field(quantity(f, "B0", "field", "/filters"), f.get("axis_projection", 1.0))
    else:
        w = resonance_from_field(0.0)
    return T1Filter(T2_star=T2_star, omega_i=w)


def _label(T):
    return "fixed" if T is None else f"{T:g}K"


# --- commands ---------------------------------------------------------------

def cmd_nsd(cfg, out):
    bath = parse_bath(cfg, require_field=False)
    block = cfg.get("nsd", {})
    if "temperatures" in block:
        temps = [parse_quantity(t, "temperature") for t in block["temperatures"]]
    else:
        temps = parse_temperatures(cfg, bath)
    f_min = quantity(block, "f_min", "frequency", "/nsd", default=2 * math.pi * 1e3)
    f_max = quantity(block, "f_max", "frequency", "/nsd", default=2 * math.pi * 1e11)
    n = block.get("points", 200)
    omega = np.concatenate([[0.0], np.geomspace(f_min, f_max, n)])

    curves, summary = [], []
    for T in temps:
        spectrum = NoiseSpectrum(bath.correlation_time(T))
        corner = cutoff_frequency(spectrum)
        curves.append(nsd(spectrum, omega))
        summary.append({
            "temperature_K": T, "tau_c_s": spectrum.tau_c, "S0_s_per_rad": spectrum.peak,
            "corner_rad_s": corner, "corner_Hz": corner / (2 * math.pi),
            "ghz_range_cutoff_rad_s": corner > 1e9, "ghz_range_cutoff_Hz": corner / (2 * math.pi) > 1e9,
        })
    header = ["omega_rad_s"] + (["S"] if len(temps) == 1 else [f"S_{_label(T)}" for T in temps])
    write_csv(out / "nsd.csv", header, zip(omega, *curves))
    write_json(out / "nsd.json", "nsd", cfg, {"spectra": summary})
    return 0


def cmd_predict(cfg, out):
    bath = parse_bath(cfg)
    temps = parse_temperatures(cfg, bath)
    t1f = parse_t1_filter(cfg)
    echo_tau = quantity(_block(cfg, "filters"), "echo_tau", "time", "/filters")
    intr = cfg.get("intrinsic", {})
    T1_int = quantity(intr, "T1", "time", "/intrinsic", default=math.inf)
    T2_int = quantity(intr, "T2", "time", "/intrinsic", default=math.inf)
    rates = (1.0 / T1_int, 1.0 / T2_int)

    preds = []
    for T in temps:
        p = predict_rates(bath, T, echo_tau, t1f, rates)
        row = p.to_dict()
        row["temperature_K"] = T
        preds.append(row)
    result = {"predictions": preds}

    if "measured" in cfg:
        m = cfg["measured"]
        comp = {}
        for key in ("T1", "T2"):
            if key in m:
                meas = quantity(m, key, "time", "/measured")
                pred = preds[0][key]
                comp[key] = {"measured_s": meas, "predicted_s": pred, "predicted_over_measured": pred / meas}
        result["comparison"] = comp

    grid = cfg.get("decay_grid", {})
    finite_T2 = [r["T2"] for r in preds if math.isfinite(r["T2"])]
    t_max = quantity(grid, "t_max", "time", "/decay_grid",
                     default=5 * max(finite_T2) if finite_T2 else 10 * echo_tau)
    times = np.linspace(0.0, t_max, grid.get("points", 101))
    cols = [echo_decay_curve(bath, T, times, rates[1]) for T in temps]
    header = ["t_us"] + (["echo"] if len(temps) == 1 else [f"echo_{_label(T)}" for T in temps])
    write_csv(out / "decay.csv", header, zip(times * 1e6, *cols))
    write_json(out / "prediction.json", "predict", cfg, result)
    return 0


def _load_curves(data_dir):
    if data_dir is None:
        raise DataError("--data directory required")
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise DataError(f"no CSV curves in {data_dir}")
    curves = []
    for f in files:
        t, y, s = read_curve_csv(f)
        md = read_curve_metadata(f.with_suffix(".json"))
        md.setdefault("nv_id", f.stem)
        curves.append((f.stem, DecayCurve(t, y, s, kind=md.get("kind", "T2"), metadata=md)))
    return curves


def _fit_all(curves, beta_bounds, out):
    fits, errors = {}, []
    for name, c in curves:
        try:
            fit = fit_decay(c, beta_bounds=beta_bounds)
        except NVBathError as err:
            errors.append({"curve": name, "type": type(err).__name__, "message": str(err)})
            continue
        fits[name] = fit
        if not fit.converged:
            errors.append({"curve": name, "type": "FitError", "message": "fit did not converge"})
        model = stretched_exp(c.times, **fit.params)
        write_csv(out / f"residuals_{name}.csv", ["t_us", "signal", "model", "residual"],
                  zip(c.times * 1e6, c.signal, model, c.signal - model))
    return fits, errors


def cmd_fit(cfg, out, data_dir=None):
    block = cfg.get("fit", {})
    mode = block.get("mode", "decay")
    beta_bounds = tuple(block.get("beta_bounds", BETA_BOUNDS))
    result, errors = {"mode": mode}, []

    if mode == "rate_model":
        pts = [(parse_quantity(T, "temperature"), parse_quantity(tc, "time")) for T, tc in block.get("points", [])]
        if not pts:
            raise DataError("rate_model mode needs fit.points")
        fixed = {}
        for k, v in block.get("fixed", {}).items():
            fixed[k] = (parse_quantity(v, "rate") if k == "tau0_inv" else
                        parse_quantity(v, "energy") if k == "E_a" else float(v))
        free = tuple(block.get("free", ["C", "n", "tau0_inv"]))
        if "E_a" not in free and "E_a" not in fixed:
            fixed["E_a"] = RelaxationRateModel.bulk_cobalt().E_a
        fit = fit_rate_model(pts, free=free, fixed=fixed)
        m = fit.model
        result["rate_model"] = {"C": m.C, "n": m.n, "tau0_inv_s-1": m.tau0_inv, "E_a_J": m.E_a,
                                "stderr_internal": fit.stderr, "chi2": fit.chi2,
                                "unidentifiable": fit.unidentifiable, "converged": fit.converged}
        write_json(out / "fit.json", "fit", cfg, result)
        return 0 if fit.converged else 4

    curves = _load_curves(data_dir)
    if mode == "table":
        tol = quantity(block, "temp_tol", "temperature", "/fit", default=0.3)
        table = t2_vs_temperature_table([c for _, c in curves if c.kind == "T2"],
                                        temp_tol=tol, fit_kwargs={"beta_bounds": beta_bounds})
        write_csv(out / "t2_table.csv", ["nv_id", "temperature_K", "field_G", "T2_us", "sigma_T2_us", "beta"],
                  [(r["nv_id"], r["temperature_K"], r["field_T"] * 1e4, r["T2_s"] * 1e6,
                    r["sigma_T2_s"] * 1e6, r["beta"]) for r in table.rows])
        errors = [{"curve": r["nv_id"], "type": "FitError", "message": r["error"]}
                  for r in table.rows if r["error"]]
        result.update(rows=table.rows, comparison=table.comparison, errors=errors)
        write_json(out / "fit.json", "fit", cfg, result)
        return 4 if errors else 0

    fits, errors = _fit_all(curves, beta_bounds, out)
    result["fits"] = {name: f.to_dict() for name, f in fits.items()}

    if mode == "extract":
        t1f = parse_t1_filter(cfg)
        branch = block.get("branch", "slow")
        by_nv = {}
        for name, c in curves:
            if name not in fits:
                continue
            key = (c.kind, bool(c.metadata.get("smm_present", True)))
            by_nv.setdefault(c.metadata["nv_id"], {})[key] = fits[name]
        extractions = {}
        for nv, d in sorted(by_nv.items()):
            need = [("T1", True), ("T2", True), ("T1", False), ("T2", False)]
            if not all(k in d for k in need):
                errors.append({"curve": nv, "type": "DataError",
                               "message": "needs T1/T2 curves with and without the bath"})
                continue
            vals = [d[k].params["T_char"] for k in need]
            sig = [d[k].stderr["T_char"] for k in need]
            echo_tau = quantity(block, "echo_tau", "time", "/fit", default=vals[1])
            try:
                ex = extract_bath(*vals, echo_tau, t1f, sigmas=sig, branch=branch)
            except NVBathError as err:
                errors.append({"curve": nv, "type": type(err).__name__, "message": str(err)})
                continue
            extractions[nv] = ex.to_dict()
        result["extractions"] = extractions
        if extractions:
            tc = [e["tau_c_s"] for e in extractions.values()]
            te = [e["tau_c_err_s"] for e in extractions.values()]
            mean, err = weighted_mean(tc, te)
            result["tau_c_weighted_mean_s"] = mean
            result["tau_c_weighted_mean_err_s"] = err
    result["errors"] = errors
    write_json(out / "fit.json", "fit", cfg, result)
    return 4 if errors else 0


_PRESETS = {
    "validation": {"tau_c": "5 us", "delta": "50 kHz", "dt": "0.01 us", "n_trajectories": 10000,
                   "taus": ["1 us", "2 us", "3 us", "4 us", "5 us", "6 us", "8 us", "10 us"]},
    "zero-field": {"tau_c": "5 us", "B_rms": "0 T", "dt": "0.01 us", "n_trajectories": 100,
                   "taus": ["1 us", "5 us", "10 us"]},
}


def cmd_simulate(cfg, out, seed=None):
    block = dict(_block(cfg, "mc"))
    preset = block.pop("preset", None)
    if preset:
        block = {**_PRESETS[preset], **block}
    tau_c = quantity(block, "tau_c", "time", "/mc")
    if "delta" in block:
        sigma_B = quantity(block, "delta", "frequency", "/mc") / GAMMA_NV
    else:
        sigma_B = quantity(block, "B_rms", "field", "/mc")
    dt = quantity(block, "dt", "time", "/mc")
    if "taus" not in block:
        raise ConfigError("missing required key 'taus'", pointer="/mc")
    taus = [parse_quantity(t, "time") for t in block["taus"]]
    n_steps = int(round(max(taus) / dt))
    seed = block.get("seed", 0) if seed is None else seed
    tcfg = TrajectoryConfig(tau_c, sigma_B, dt, n_steps, block.get("n_trajectories", 10000), seed)
    res = simulate_echo_decay(tcfg, taus, workers=block.get("workers"))
    d2 = (GAMMA_NV * sigma_B) ** 2
    exact = np.exp(-closed_form_ou_echo(d2, tau_c, res.times))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(res.stderr > 0, np.abs(res.mean_signal - exact) / res.stderr, 0.0)
    summary = res.to_dict()
    summary.update(closed_form=exact, max_deviation_sigma=float(z.max()),
                   within_3_sigma=bool(z.max() < 3.0),
                   resolved={"tau_c_s": tau_c, "sigma_B_T": sigma_B, "dt_s": dt,
                             "n_steps": n_steps, "seed": seed, "preset": preset})
    write_csv(out / "simulate.csv", ["tau_us", "mc_signal", "mc_stderr", "closed_form"],
              zip(res.times * 1e6, res.mean_signal, res.stderr, exact))
    if block.get("dump_trajectory"):
        dump_trajectory_csv(out / "trajectory.csv", tcfg, 0)
    resolved_cfg = copy.deepcopy(cfg)
    resolved_cfg["mc"]["seed"] = seed
    write_json(out / "simulate.json", "simulate", resolved_cfg, summary)
    return 0


def cmd_geometry(cfg, out, seed=None):
    g = _block(cfg, "geometry")
    geom = SensingGeometry(
        nv_depth=quantity(g, "nv_depth", "length", "/geometry", default=8e-9),
        sensing_radius=quantity(g, "sensing_radius", "length", "/geometry", default=20e-9),
        cap_radius=quantity(g, "cap_radius", "length", "/geometry"),
        cap_height=quantity(g, "cap_height", "length", "/geometry"),
        concentration=quantity(g, "concentration", "concentration", "/geometry"),
    )
    result = {"volume_m3": geom.volume, "molecule_count": geom.n_molecules}
    if "target_count" in g:
        target = float(g["target_count"])
        result["target_count"] = target
        result["implied_volume_m3"] = implied_volume(target, geom.concentration)
        if geom.n_molecules < target:
            result["note"] = ("cap holds fewer molecules than the target count; the target "
                              "implies a larger deposit volume (see implied_volume_m3)")
    if g.get("dipolar", False):
        est = dipolar_b_rms(geom, g.get("moment_muB", DEFAULT_MOMENT_MUB),
                            g.get("n_samples", 100_000), seed=0 if seed is None else seed)
        result["dipolar"] = {"B_rms_T": est.b_rms, "B_rms_stderr_T": est.b_rms_stderr,
                             "B_sq_T2": est.b_sq, "n_molecules_in_range": est.n_molecules_in_range,
                             "n_samples": est.n_samples, "assumptions": est.assumptions}
    write_json(out / "geometry.json", "geometry", cfg, result)
    return 0


COMMANDS = ("nsd", "predict", "fit", "simulate", "geometry")


def build_parser():
    p = argparse.ArgumentParser(prog="nvbath", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--data", help="directory of t_us,signal[,sigma] CSV curves (fit)")
    p.add_argument("--out", help="output directory (overrides output_dir in the config)")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed for Monte Carlo commands")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    level = max(logging.DEBUG, logging.WARNING - 10 * (args.verbose + cfg.get("verbosity", 0)))
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    out = Path(args.out or cfg.get("output_dir", "nvbath_out"))
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s -> %s", args.command, out)
    if args.command == "nsd":
        return cmd_nsd(cfg, out)
    if args.command == "predict":
        return cmd_predict(cfg, out)
    if args.command == "fit":
        return cmd_fit(cfg, out, args.data)
    if args.command == "simulate":
        return cmd_simulate(cfg, out, args.seed)
    return cmd_geometry(cfg, out, args.seed)


def main(argv=None):
    try:
        return run(argv)
    except NVBathError as err:
        code = exit_code_for(err)
        print(f"nvbath: error: {type(err).__name__}: {err}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
