# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler-Maruyama stepping kernel.

Same contract as ``_stepper_py.advance``; the inner loop is plain C over
typed memoryviews so a full Monte Carlo run is dominated by arithmetic,
not interpreter dispatch.
"""

from libc.math cimport fabs

import numpy as np


def advance(double[::1] z, double[:, ::1] m, double[:, ::1] qbar,
            double[:, ::1] krk, double[:, ::1] noise, double dt):
    cdef Py_ssize_t dim = z.shape[0]
    cdef Py_ssize_t half = qbar.shape[0]
    cdef Py_ssize_t steps = noise.shape[0]
    cdef double[::1] dz = np.empty(dim, dtype=np.float64)
    cdef double cost = 0.0, err = 0.0, mx = 0.0
    cdef double acc, qf, e, v
    cdef Py_ssize_t t, i, j

    if m.shape[0] != dim or m.shape[1] != dim or 2 * half != dim:
        raise ValueError("inconsistent kernel array shapes")
    if noise.shape[1] != dim:
        raise ValueError("noise must have one column per state entry")

    with nogil:
        for t in range(steps):
            qf = 0.0
            for i in range(half):
                acc = 0.0
                for j in range(half):
                    acc += qbar[i, j] * z[j]
                qf += z[i] * acc
            for i in range(half):
                acc = 0.0
                for j in range(half):
                    acc += krk[i, j] * z[half + j]
                qf += z[half + i] * acc
            cost += qf
            for i in range(half):
                e = z[i] - z[half + i]
                err += e * e
            for i in range(dim):
                acc = 0.0
                for j in range(dim):
                    acc += m[i, j] * z[j]
                dz[i] = acc
            for i in range(dim):
                v = z[i] + dt * dz[i] + noise[t, i]
                z[i] = v
                if fabs(v) > mx:
                    mx = fabs(v)
    return cost * dt, err * dt, mx
