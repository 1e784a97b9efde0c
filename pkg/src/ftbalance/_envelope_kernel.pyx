# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lower-hull kernel.

Mirrors ``_envelope_fallback.lower_hull_envelope`` operation for operation;
both backends must return bitwise-equal envelopes.
"""

import numpy as np


def lower_hull_envelope(double[::1] x, double[::1] y):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t[::1] hull = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, j, k, a, b, seg
    cdef double ya, slope, v

    hull[0] = 0
    for i in range(1, n):
        while top >= 1:
            j = hull[top]
            k = hull[top - 1]
            if (y[j] - y[k]) * (x[i] - x[k]) >= (y[i] - y[k]) * (x[j] - x[k]):
                top -= 1
            else:
                break
        top += 1
        hull[top] = i

    env_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] env = env_arr
    for seg in range(top):
        a = hull[seg]
        b = hull[seg + 1]
        ya = y[a]
        slope = (y[b] - ya) / (x[b] - x[a])
        env[a] = ya
        for i in range(a + 1, b):
            v = ya + slope * (x[i] - x[a])
            if v > y[i]:
                v = y[i]
            env[i] = v
    env[hull[top]] = y[hull[top]]
    return env_arr.tolist(), [hull[seg] for seg in range(top + 1)]


BACKEND = "cython"
