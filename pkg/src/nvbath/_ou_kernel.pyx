# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for Ornstein-Uhlenbeck trajectories.

Mirrors :mod:`nvbath._ou_fallback` operation for operation so that both
backends produce identical floating-point results.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def ou_paths(double[:, ::1] xi, double a, double s, double sigma):
    """B[:, 0] = sigma xi[:, 0]; B[:, k+1] = a B[:, k] + s xi[:, k+1]."""
    cdef Py_ssize_t n_traj = xi.shape[0], n = xi.shape[1]
    cdef Py_ssize_t i, k
    out_arr = np.empty((n_traj, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double b
    with nogil:
        for i in range(n_traj):
            b = sigma * xi[i, 0]
            out[i, 0] = b
            for k in range(1, n):
                b = a * b + s * xi[i, k]
                out[i, k] = b
    return out_arr


def ou_integrals(double[:, ::1] xi, double a, double s, double sigma, double dt,
                 cnp.intp_t[::1] idx):
    """Trapezoidal running integral of the OU path sampled at sorted step indices ``idx``."""
    cdef Py_ssize_t n_traj = xi.shape[0], n = xi.shape[1], m = idx.shape[0]
    cdef Py_ssize_t i, k, j
    out_arr = np.zeros((n_traj, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double b, b_prev, acc
    cdef double half_dt = 0.5 * dt
    with nogil:
        for i in range(n_traj):
            b = sigma * xi[i, 0]
            acc = 0.0
            j = 0
            while j < m and idx[j] == 0:
                out[i, j] = acc
                j += 1
            for k in range(1, n):
                if j >= m:
                    break
                b_prev = b
                b = a * b + s * xi[i, k]
                acc = acc + half_dt * (b_prev + b)
                while j < m and idx[j] == k:
                    out[i, j] = acc
                    j += 1
    return out_arr
