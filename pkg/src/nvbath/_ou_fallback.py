"""Pure NumPy versions of the compiled OU loops (same arithmetic order)."""

import numpy as np


def ou_paths(xi, a, s, sigma):
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    out = np.empty_like(xi)
    b = sigma * xi[:, 0]
    out[:, 0] = b
    for k in range(1, xi.shape[1]):
        b = a * b + s * xi[:, k]
        out[:, k] = b
    return out


def ou_integrals(xi, a, s, sigma, dt, idx):
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    idx = np.asarray(idx, dtype=np.intp)
    out = np.zeros((xi.shape[0], idx.size))
    half_dt = 0.5 * dt
    b = sigma * xi[:, 0]
    acc = np.zeros(xi.shape[0])
    last = int(idx[-1]) if idx.size else 0
    # columns of out to fill at each step
    slots = {}
    for j, k in enumerate(idx):
        slots.setdefault(int(k), []).append(j)
    for j in slots.get(0, ()):
        out[:, j] = acc
    for k in range(1, min(last, xi.shape[1] - 1) + 1):
        b_prev = b
        b = a * b + s * xi[:, k]
        acc = acc + half_dt * (b_prev + b)
        for j in slots.get(k, ()):
            out[:, j] = acc
    return out
