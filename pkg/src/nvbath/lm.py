"""Bound-constrained Levenberg-Marquardt least squares.

A compact Marquardt-scaled LM with projection onto box bounds. Steps
are accepted only if they reduce the cost, so :attr:`LMResult.cost_history`
is non-increasing by construction.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    jac: np.ndarray
    residuals: np.ndarray
    converged: bool
    n_iter: int
    message: str
    cost_history: list = field(default_factory=list)


def levenberg_marquardt(fun, jac, x0, lower=None, upper=None, max_iter=200,
                        ftol=1e-15, xtol=1e-15, gtol=1e-15, lam0=1e-3):
    """Minimize ``0.5 * sum(fun(x)**2)``.

    ``jac(x)`` returns the Jacobian of the residual vector. Convergence is
    declared on a small relative cost change, a small relative step, or a
    small scaled gradient.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    x = np.clip(x, lo, hi)

    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        return LMResult(x, np.inf, np.zeros((r.size, n)), r, False, 0, "non-finite residual at start", [])
    cost = 0.5 * float(r @ r)
    J = np.asarray(jac(x), dtype=float)
    lam = lam0
    history = [cost]
    message = "maximum iterations reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        JTJ = J.T @ J
        d = np.diag(JTJ).copy()
        d[d <= 0] = 1.0
        if np.max(np.abs(g) / np.sqrt(d)) <= gtol * max(np.sqrt(2 * cost), 1e-300):
            converged, message = True, "gradient tolerance"
            break
        accepted = False
        for _ in range(60):
            A = JTJ + lam * np.diag(d)
            try:
                step = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = np.clip(x + step, lo, hi)
            r_new = np.asarray(fun(x_new), dtype=float)
            if np.all(np.isfinite(r_new)):
                cost_new = 0.5 * float(r_new @ r_new)
                if cost_new < cost:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            converged, message = True, "no further decrease possible"
            break
        dx = x_new - x
        dcost = cost - cost_new
        # a small decrease only signals convergence for a near Gauss-Newton step;
        # heavily damped steps shrink the cost slowly while still far from the minimum
        gauss_newton = lam <= 1e-8
        x, r, cost = x_new, r_new, cost_new
        J = np.asarray(jac(x), dtype=float)
        history.append(cost)
        lam = max(lam / 10.0, 1e-15)
        if (dcost <= ftol * cost_new and gauss_newton) or cost_new == 0.0:
            converged, message = True, "cost tolerance"
            break
        if np.all(np.abs(dx) <= xtol * (np.abs(x) + xtol)):
            converged, message = True, "step tolerance"
            break
    return LMResult(x, cost, J, r, converged, it, message, history)
