"""Decay-curve fitting and inversion of relaxation data for bath parameters."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DataError, DomainError, FitError, IdentifiabilityError, NoSolutionError
from .filters import T1Filter
from .lm import levenberg_marquardt
from .noise import NoiseSpectrum, RelaxationRateModel
from .relaxation import KAPPA, echo_overlap_integral, t1_overlap_integral
from .units import GAMMA_NV, K_BOLTZMANN

BETA_BOUNDS = (0.5, 3.0)
TAU_C_BOUNDS = (1e-9, 1.0)


@dataclass
class DecayCurve:
    """Signal versus time (seconds) with optional per-point uncertainties."""

    times: np.ndarray
    signal: np.ndarray
    sigma: np.ndarray = None
    kind: str = "T2"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.signal = np.asarray(self.signal, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.signal.shape:
            raise DataError("times and signal must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DataError("times must be strictly increasing")
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if self.sigma.shape != self.times.shape:
                raise DataError("sigma must match times in length")
            if np.any(~(self.sigma > 0)):
                raise DataError("sigma must be positive")
        if self.kind not in ("T1", "T2"):
            raise DataError(f"kind must be 'T1' or 'T2', got {self.kind!r}")


def stretched_exp(t, A, T_char, beta, baseline):
    return baseline + A * np.exp(-np.power(np.asarray(t, dtype=float) / T_char, beta))


@dataclass
class FitResult:
    params: dict
    covariance: np.ndarray
    stderr: dict
    chi2_reduced: float
    converged: bool
    n_iter: int
    residuals: np.ndarray
    cost_history: list
    starts: list = field(default_factory=list)

    PARAM_NAMES = ("A", "T_char", "beta", "baseline")

    def to_dict(self):
        return {
            "params": dict(self.params),
            "stderr": dict(self.stderr),
            "covariance": self.covariance.tolist(),
            "chi2_reduced": self.chi2_reduced,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }


def _mad_scale(r):
    return 1.4826 * float(np.median(np.abs(r - np.median(r))))


def fit_decay(curve, beta_bounds=BETA_BOUNDS, n_starts=6, beta_starts=(1.0, 2.0), max_iter=300):
    """Fit ``baseline + A exp[-(t/T_char)^beta]`` by weighted least squares.

    Multi-start over log-spaced ``T_char`` across the data time range (and
    the listed ``beta`` values); for each start the linear parameters are
    initialized by linear least squares. The best start is chosen by lowest
    cost, then smallest beta, then smallest ``T_char``.
    """
    t, y = curve.times, curve.signal
    if t.size < 5:
        raise DataError("need at least 5 points to fit a stretched exponential")
    if np.ptp(y) == 0:
        raise DataError("signal is constant")
    w = 1.0 / curve.sigma if curve.sigma is not None else np.ones_like(y)

    # work in units of the longest time so parameters are O(1)
    scale = float(t[-1])
    ts = t / scale
    t_pos = ts[ts > 0]
    t_lo = float(t_pos[0]) if t_pos.size else ts[-1] * 1e-3
    lower = np.array([-np.inf, t_lo * 1e-3, beta_bounds[0], -np.inf])
    upper = np.array([np.inf, 1e3, beta_bounds[1], np.inf])
    with np.errstate(divide="ignore"):
        log_ts = np.where(ts > 0, np.log(np.where(ts > 0, ts, 1.0)), 0.0)

    def model(p):
        return p[3] + p[0] * np.exp(-np.power(ts / p[1], p[2]))

    def fun(p):
        return (model(p) - y) * w

    def jac(p):
        A, T, b, _ = p
        u = np.power(ts / T, b)
        e = np.exp(-u)
        dlog = np.where(ts > 0, log_ts - math.log(T), 0.0)
        return np.column_stack([e, A * e * u * b / T, -A * e * u * dlog, np.ones_like(ts)]) * w[:, None]

    starts = []
    for T0 in np.geomspace(t_lo, 1.0, n_starts):
        for b0 in beta_starts:
            e = np.exp(-np.power(ts / T0, b0))
            X = np.column_stack([e, np.ones_like(ts)]) * w[:, None]
            (A0, c0), *_ = np.linalg.lstsq(X, y * w, rcond=None)
            p0 = np.array([A0, T0, b0, c0])
            res = levenberg_marquardt(fun, jac, p0, lower, upper, max_iter=max_iter)
            starts.append({"T_char0": T0 * scale, "beta0": b0, "result": res})

    ok = [s for s in starts if s["result"].converged and np.isfinite(s["result"].cost)]
    if not ok:
        raise FitError("stretched-exponential fit did not converge from any start",
                       {"starts": [{"T_char0": s["T_char0"], "beta0": s["beta0"],
                                    "message": s["result"].message, "cost": s["result"].cost}
                                   for s in starts]})
    best_cost = min(s["result"].cost for s in ok)
    tied = [s for s in ok if s["result"].cost <= best_cost * (1 + 1e-9) + 1e-300]
    best = min(tied, key=lambda s: (round(s["result"].x[2], 9), s["result"].x[1]))["result"]

    p = best.x.copy()
    n, k = y.size, 4
    dof = max(n - k, 1)
    r = best.residuals
    if curve.sigma is not None:
        chi2 = float(r @ r) / dof
        cov_scale = 1.0
    else:
        ssr = float(r @ r)
        s_mad = _mad_scale(r)
        s_rms = math.sqrt(ssr / dof)
        s = s_mad if s_mad > 0 else s_rms
        chi2 = float(np.sum((r / s) ** 2)) / dof if s > 0 else 0.0
        cov_scale = ssr / dof
    J = best.jac
    cov_s = np.linalg.pinv(J.T @ J) * cov_scale
    units = np.array([1.0, scale, 1.0, 1.0])
    cov = cov_s * np.outer(units, units)
    cov = 0.5 * (cov + cov.T)
    p[1] *= scale
    names = FitResult.PARAM_NAMES
    return FitResult(
        params=dict(zip(names, map(float, p))),
        covariance=cov,
        stderr=dict(zip(names, map(float, np.sqrt(np.clip(np.diag(cov), 0, None))))),
        chi2_reduced=chi2,
        converged=best.converged,
        n_iter=best.n_iter,
        residuals=r / w,
        cost_history=best.cost_history,
        starts=[{"T_char0": s["T_char0"], "beta0": s["beta0"], "cost": s["result"].cost,
                 "converged": s["result"].converged} for s in starts],
    )


# --- inversion of paired T1/T2 data -----------------------------------------

@dataclass
class BathExtraction:
    tau_c: float
    tau_c_err: float
    B_rms_sq: float
    B_rms_sq_err: float
    residual_norm: float
    inputs_echo_tau: float
    branch: str
    rate_ratio: float
    alternatives: list = field(default_factory=list)

    @property
    def B_rms(self):
        return math.sqrt(self.B_rms_sq)

    def to_dict(self):
        return {
            "tau_c_s": self.tau_c, "tau_c_err_s": self.tau_c_err,
            "B_rms_sq_T2": self.B_rms_sq, "B_rms_sq_err_T2": self.B_rms_sq_err,
            "B_rms_T": self.B_rms, "residual_norm": self.residual_norm,
            "echo_tau_s": self.inputs_echo_tau, "branch": self.branch,
            "rate_ratio": self.rate_ratio, "alternative_tau_c_s": list(self.alternatives),
        }


def overlap_ratio(tau_c, echo_tau, t1f):
    """``int S F2 / int S F1`` at correlation time ``tau_c``; independent of <B^2>."""
    s = NoiseSpectrum(tau_c)
    return echo_overlap_integral(s, echo_tau) / t1_overlap_integral(s, t1f)


def ratio_peak(echo_tau, t1f, bounds=TAU_C_BOUNDS, n_grid=37):
    """Location and value of the maximum of :func:`overlap_ratio` over ``bounds``.

    Correlation times below the peak belong to the ``"fast"`` branch and
    those above it to the ``"slow"`` branch.
    """
    grid = np.geomspace(bounds[0], bounds[1], n_grid)
    logr = [math.log(overlap_ratio(tc, echo_tau, t1f)) for tc in grid]
    i = int(np.argmax(logr))
    lo, hi = math.log(grid[max(i - 1, 0)]), math.log(grid[min(i + 1, n_grid - 1)])
    res = minimize_scalar(lambda x: -math.log(overlap_ratio(math.exp(x), echo_tau, t1f)),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if -res.fun >= logr[i]:
        return math.exp(res.x), math.exp(-res.fun)
    return float(grid[i]), math.exp(logr[i])


def _bracket_roots(grid, g, f):
    roots = []
    for i in range(len(grid) - 1):
        if g[i] == 0:
            roots.append(float(grid[i]))
        elif g[i] * g[i + 1] < 0:
            x = brentq(f, math.log(grid[i]), math.log(grid[i + 1]), xtol=1e-13, rtol=1e-14)
            roots.append(math.exp(x))
    if g[-1] == 0:
        roots.append(float(grid[-1]))
    return roots


def _ratio_roots(target, echo_tau, t1f, bounds, n_grid=37, near=None):
    def f(x):
        return math.log(overlap_ratio(math.exp(x), echo_tau, t1f)) - math.log(target)

    if near is not None:
        # re-solve close to a known root (used for error propagation)
        grid = np.geomspace(near / 1.5, near * 1.5, 3)
        g = [f(math.log(x)) for x in grid]
        r = np.exp(np.array(g)) * target
        return _bracket_roots(grid, g, f), (float(r.min()), float(r.max()))

    grid = np.geomspace(bounds[0], bounds[1], n_grid)
    g = np.array([f(math.log(x)) for x in grid])
    rmin = float(np.exp(g.min()) * target)
    peak, rmax = ratio_peak(echo_tau, t1f, bounds, n_grid)
    gp = math.log(rmax) - math.log(target)
    if abs(gp) < 1e-9:
        # target sits on the maximum: a double root
        return [peak], (rmin, rmax)
    # the ratio is unimodal, so solve each monotone side separately
    left = grid < peak
    roots = _bracket_roots(np.append(grid[left], peak), np.append(g[left], gp), f)
    roots += _bracket_roots(np.insert(grid[~left], 0, peak), np.insert(g[~left], 0, gp), f)
    return sorted(set(roots)), (rmin, rmax)


def _solve_bath(T1_with, T2_with, T1_int, T2_int, echo_tau, t1f, branch, bounds, near=None):
    times = (T1_with, T2_with, T1_int, T2_int)
    if not all(x > 0 for x in times):
        raise DataError("all relaxation times must be positive")
    rate1 = 1.0 / T1_with - 1.0 / T1_int
    rate2 = 1.0 / T2_with - 1.0 / T2_int
    if rate1 < 0 or rate2 < 0:
        raise DataError(f"bath-induced rate is negative (T1: {rate1:g}, T2: {rate2:g} 1/s)")
    if rate1 == 0 or rate2 == 0:
        raise NoSolutionError("no bath signal in at least one channel; the rate ratio is undefined",
                              {"rate1": rate1, "rate2": rate2})
    target = rate2 / rate1
    roots, (rmin, rmax) = _ratio_roots(target, echo_tau, t1f, bounds, near=near)
    if near is not None and not roots:
        roots, (rmin, rmax) = _ratio_roots(target, echo_tau, t1f, bounds)
    if not roots:
        raise NoSolutionError(
            f"rate ratio {target:.4g} outside the attainable range [{rmin:.4g}, {rmax:.4g}] "
            f"for tau_c in [{bounds[0]:g}, {bounds[1]:g}] s",
            {"ratio": target, "ratio_min": rmin, "ratio_max": rmax})
    if branch == "slow":
        tau_c = roots[-1]
    elif branch == "fast":
        tau_c = roots[0]
    else:
        raise DomainError(f"branch must be 'slow' or 'fast', got {branch!r}")
    ov2 = echo_overlap_integral(NoiseSpectrum(tau_c), echo_tau)
    B_sq = float(rate2 / (KAPPA * GAMMA_NV**2 * ov2))
    return tau_c, B_sq, float(target), roots, rate1, rate2


def extract_bath(T1_with, T2_with, T1_int, T2_int, echo_tau, t1f=None, sigmas=None,
                 branch="slow", bounds=TAU_C_BOUNDS):
    """Invert the overlap-rate model for ``(tau_c, <B^2>)``.

    The ratio of bath-induced rates ``(1/T2 - 1/T2_int) / (1/T1 - 1/T1_int)``
    depends on ``tau_c`` alone. It rises, peaks near ``tau_c ~ echo_tau``
    and falls again, so a measured ratio generally has two roots. ``branch``
    selects the larger (``"slow"``, tau_c above the peak) or smaller
    (``"fast"``) one; the other is reported in ``alternatives``.

    ``sigmas`` are the 1-sigma uncertainties of the four input times, which are
    propagated by finite-difference linearization.
    """
    if t1f is None:
        t1f = T1Filter()
    inputs = np.array([T1_with, T2_with, T1_int, T2_int], dtype=float)
    tau_c, B_sq, ratio, roots, rate1, rate2 = _solve_bath(*inputs, echo_tau, t1f, branch, bounds)

    # forward consistency of the solution
    s = NoiseSpectrum(tau_c)
    pred1 = KAPPA * GAMMA_NV**2 * B_sq * t1_overlap_integral(s, t1f)
    pred2 = KAPPA * GAMMA_NV**2 * B_sq * echo_overlap_integral(s, echo_tau)
    resid = math.hypot((pred1 - rate1) / rate1, (pred2 - rate2) / rate2)

    tau_err = B_err = 0.0
    if sigmas is not None:
        sig = np.asarray(sigmas, dtype=float)
        jac = np.zeros((2, 4))
        for j in range(4):
            if sig[j] == 0:
                continue
            h = 1e-6 * inputs[j]
            plus, minus = inputs.copy(), inputs.copy()
            plus[j] += h
            minus[j] -= h
            a = _solve_bath(*plus, echo_tau, t1f, branch, bounds, near=tau_c)
            b = _solve_bath(*minus, echo_tau, t1f, branch, bounds, near=tau_c)
            jac[:, j] = [(a[0] - b[0]) / (2 * h), (a[1] - b[1]) / (2 * h)]
        cov = jac @ np.diag(sig**2) @ jac.T
        tau_err, B_err = (float(math.sqrt(max(v, 0.0))) for v in np.diag(cov))
    return BathExtraction(
        tau_c=tau_c, tau_c_err=tau_err, B_rms_sq=B_sq, B_rms_sq_err=B_err,
        residual_norm=resid, inputs_echo_tau=echo_tau, branch=branch, rate_ratio=ratio,
        alternatives=[r for r in roots if r != tau_c],
    )


def weighted_mean(values, errors):
    """Inverse-variance weighted mean and its standard error."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
    w = 1.0 / e**2
    return float(np.sum(w * v) / np.sum(w)), float(1.0 / math.sqrt(np.sum(w)))


# --- Raman + Orbach temperature series ---------------------------------------

_RATE_PARAMS = ("C", "n", "tau0_inv", "E_a")


@dataclass
class RateModelFit:
    model: RelaxationRateModel
    free: tuple
    stderr: dict
    covariance: np.ndarray
    chi2: float
    singular_values: np.ndarray
    unidentifiable: list
    converged: bool


def _to_internal(name, value):
    # log for the positive scale parameters, E_a in units of k_B * 1 K
    if name == "n":
        return value
    if name == "E_a":
        return math.log(value / K_BOLTZMANN)
    return math.log(value)


def _from_internal(name, x):
    if name == "n":
        return x
    if name == "E_a":
        return math.exp(x) * K_BOLTZMANN
    return math.exp(x)


def fit_rate_model(points, free=("C", "n", "tau0_inv"), fixed=None, sigma_log=None,
                   span_factor=2.0, svd_rtol=1e-8):
    """Fit ``1/tau_c = C T^n + tau0_inv exp(-E_a / k_B T)`` in log-rate space.

    ``points`` is a sequence of ``(T, tau_c)``. Parameters not in ``free``
    take their value from ``fixed`` (``E_a`` must be given in joules when
    fixed, which is the usual protocol). Returns the fitted model together
    with standard errors of the internal (log) parameters and the list of
    practically unidentifiable directions.
    """
    fixed = dict(fixed or {})
    free = tuple(free)
    for p in free:
        if p not in _RATE_PARAMS:
            raise DomainError(f"unknown rate parameter {p!r}")
    missing = [p for p in _RATE_PARAMS if p not in free and p not in fixed]
    if missing:
        raise DomainError(f"parameters neither free nor fixed: {missing}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError("points must be (T, tau_c) pairs")
    T, tau = pts[:, 0], pts[:, 1]
    if np.any(T <= 0) or np.any(tau <= 0):
        raise DataError("temperatures and correlation times must be positive")
    if len(T) < len(free):
        raise IdentifiabilityError(
            f"{len(T)} point(s) cannot determine {len(free)} free parameters", deficient=list(free))
    if {"C", "n", "tau0_inv"} <= set(free) and T.max() < span_factor * T.min():
        raise IdentifiabilityError(
            f"temperatures span less than a factor {span_factor} with C, n, tau0_inv all free",
            deficient=list(free))
    y = -np.log(tau)  # log rate
    w = np.ones_like(y) if sigma_log is None else 1.0 / np.asarray(sigma_log, dtype=float)

    def unpack(x):
        vals = dict(fixed)
        for name, xi in zip(free, x):
            vals[name] = _from_internal(name, xi)
        return vals

    def log_rate(vals):
        raman = vals["C"] * T ** vals["n"]
        orbach = vals["tau0_inv"] * np.exp(-vals["E_a"] / (K_BOLTZMANN * T))
        return raman, orbach

    def fun(x):
        vals = unpack(x)
        raman, orbach = log_rate(vals)
        with np.errstate(divide="ignore"):
            return (np.log(raman + orbach) - y) * w

    def jac(x):
        vals = unpack(x)
        raman, orbach = log_rate(vals)
        tot = raman + orbach
        cols = []
        for name in free:
            if name == "C":
                cols.append(raman / tot)
            elif name == "n":
                cols.append(raman * np.log(T) / tot)
            elif name == "tau0_inv":
                cols.append(orbach / tot)
            else:
                cols.append(-orbach * vals["E_a"] / (K_BOLTZMANN * T) / tot)
        return np.column_stack(cols) * w[:, None]

    starts = _rate_starts(T, y, free, fixed)
    best = None
    for x0 in starts:
        res = levenberg_marquardt(fun, jac, x0, max_iter=500)
        if np.isfinite(res.cost) and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError("rate-model fit failed from every start")

    vals = unpack(best.x)
    J = best.jac
    sv = np.linalg.svd(J, compute_uv=False) if J.size else np.array([])
    _, _, vt = np.linalg.svd(J, full_matrices=False)
    deficient = []
    if sv.size and sv[0] > 0:
        for s_i, v in zip(sv, vt):
            if s_i < svd_rtol * sv[0]:
                deficient.append({name: float(c) for name, c in zip(free, v)})
    if sv.size and (sv[0] == 0 or sv[-1] <= 1e-14 * sv[0]):
        raise IdentifiabilityError("rate-model Jacobian is rank deficient",
                                   deficient=deficient or list(free))
    dof = max(len(y) - len(free), 1)
    cov = np.linalg.pinv(J.T @ J) * (2 * best.cost / dof if sigma_log is None else 1.0)
    model = RelaxationRateModel(**{k: float(vals[k]) for k in _RATE_PARAMS})
    return RateModelFit(
        model=model, free=free,
        stderr={name: float(math.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(free)},
        covariance=cov, chi2=2 * best.cost / dof, singular_values=sv,
        unidentifiable=deficient, converged=best.converged,
    )


def _rate_starts(T, y, free, fixed):
    """Initial internal parameter vectors for the rate-model fit."""
    order = np.argsort(T)
    Ts, ys = T[order], y[order]
    guesses = {}
    # Raman guess from the coldest points (ln rate vs ln T)
    k = max(2, min(len(Ts), 3))
    if len(Ts) >= 2:
        n0, lnC0 = np.polyfit(np.log(Ts[:k]), ys[:k], 1)
    else:
        n0, lnC0 = fixed.get("n", 3.0), ys[0] - fixed.get("n", 3.0) * math.log(Ts[0])
    n0 = float(np.clip(n0, 0.5, 12.0)) if "n" in free else fixed["n"]
    if "C" in free and "n" not in free:
        lnC0 = float(np.median(ys[:k] - n0 * np.log(Ts[:k])))
    guesses["C"] = float(lnC0)
    guesses["n"] = n0
    Ea = fixed.get("E_a", 100.0 * K_BOLTZMANN)
    guesses["E_a"] = math.log(Ea / K_BOLTZMANN)
    C0 = fixed.get("C", math.exp(lnC0))
    # Orbach guess from the hottest point after removing the Raman part
    excess = math.exp(ys[-1]) - C0 * Ts[-1] ** n0
    guesses["tau0_inv"] = math.log(max(excess, 1e-3 * math.exp(ys[-1]))) + Ea / (K_BOLTZMANN * Ts[-1])

    # exact linear solve for (ln C, n) when the Orbach part is fixed
    if set(free) == {"C", "n"}:
        orb = fixed["tau0_inv"] * np.exp(-fixed["E_a"] / (K_BOLTZMANN * T))
        excess = np.exp(y) - orb
        if np.all(excess > 0):
            A = np.column_stack([np.ones_like(T), np.log(T)])
            (lnC, n_lin), *_ = np.linalg.lstsq(A, np.log(excess), rcond=None)
            guesses["C"], guesses["n"] = float(lnC), float(n_lin)

    base = np.array([guesses[name] for name in free])
    starts = [base]
    for dn in (-1.0, 1.0):
        if "n" in free:
            s = base.copy()
            s[free.index("n")] += dn
            starts.append(s)
    for d in (-4.0, 4.0):
        if "tau0_inv" in free:
            s = base.copy()
            s[free.index("tau0_inv")] += d
            starts.append(s)
    return starts


# --- temperature / field tables ---------------------------------------------

@dataclass
class T2Table:
    rows: list
    comparison: dict = None


def t2_vs_temperature_table(curves, group_by="field_T", temp_tol=0.3, fit_kwargs=None):
    """Fit each echo curve and tabulate ``(T, B0, T2, sigma_T2)``.

    Rows are sorted by field then temperature. When the lowest- and
    highest-field groups both contain a curve at a common temperature
    (within ``temp_tol`` kelvin) the relative T2 increase between them at the
    highest such temperature is reported in ``comparison``.
    """
    curves = list(curves)
    if not curves:
        raise DataError("no curves supplied")
    rows = []
    for i, c in enumerate(curves):
        md = c.metadata or {}
        if "temperature_K" not in md or group_by not in md:
            raise DataError(f"curve {i} lacks temperature_K / {group_by} metadata")
        row = {"index": i, "nv_id": md.get("nv_id"), "temperature_K": float(md["temperature_K"]),
               group_by: float(md[group_by]), "T2_s": float("nan"), "sigma_T2_s": float("nan"),
               "beta": float("nan"), "converged": False, "error": None}
        try:
            fit = fit_decay(c, **(fit_kwargs or {}))
        except (FitError, DataError) as err:
            row["error"] = str(err)
        else:
            row.update(T2_s=fit.params["T_char"], sigma_T2_s=fit.stderr["T_char"],
                       beta=fit.params["beta"], converged=fit.converged)
        rows.append(row)
    rows.sort(key=lambda r: (r[group_by], r["temperature_K"], r["index"]))

    comparison = None
    good = [r for r in rows if r["error"] is None]
    fields = sorted({r[group_by] for r in good})
    if len(fields) >= 2:
        lo_rows = [r for r in good if r[group_by] == fields[0]]
        hi_rows = [r for r in good if r[group_by] == fields[-1]]
        pairs = [(a, b) for a in lo_rows for b in hi_rows
                 if abs(a["temperature_K"] - b["temperature_K"]) <= temp_tol]
        if pairs:
            a, b = max(pairs, key=lambda p: (p[0]["temperature_K"] + p[1]["temperature_K"]))
            ratio = b["T2_s"] / a["T2_s"]
            err = ratio * math.hypot(a["sigma_T2_s"] / a["T2_s"], b["sigma_T2_s"] / b["T2_s"])
            comparison = {
                "temperature_K": 0.5 * (a["temperature_K"] + b["temperature_K"]),
                "low_field": fields[0], "high_field": fields[-1],
                "T2_low_s": a["T2_s"], "T2_high_s": b["T2_s"],
                "relative_increase": ratio - 1.0, "relative_increase_err": err,
            }
    return T2Table(rows, comparison)
