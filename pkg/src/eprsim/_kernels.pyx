# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels. Must stay bit-identical to ``_kernels_py``."""

import numpy as np


def axis_signs(const double[:, ::1] lam, const double[:, ::1] axes):
    cdef Py_ssize_t n = lam.shape[0], k = axes.shape[0], t, i
    cdef double d
    out = np.empty((k, n), dtype=np.int8)
    cdef signed char[:, ::1] s = out
    with nogil:
        for i in range(k):
            for t in range(n):
                d = lam[t, 0] * axes[i, 0] + lam[t, 1] * axes[i, 1] + lam[t, 2] * axes[i, 2]
                s[i, t] = 1 if d >= 0 else -1
    return out


def sign_gram(const double[:, ::1] lam, const double[:, ::1] axes):
    cdef Py_ssize_t n = lam.shape[0], k = axes.shape[0], t, i, j
    cdef double d
    gram = np.zeros((k, k), dtype=np.int64)
    buf = np.empty(k, dtype=np.int8)
    cdef long long[:, ::1] g = gram
    cdef signed char[::1] s = buf
    with nogil:
        for t in range(n):
            for i in range(k):
                d = lam[t, 0] * axes[i, 0] + lam[t, 1] * axes[i, 1] + lam[t, 2] * axes[i, 2]
                s[i] = 1 if d >= 0 else -1
            for i in range(k):
                for j in range(i, k):
                    g[i, j] += s[i] * s[j]
        for i in range(k):
            for j in range(i):
                g[i, j] = g[j, i]
    return gram


def pair_outcomes(const double[::1] u_first, const double[::1] u_malus, double p_keep):
    cdef Py_ssize_t n = u_first.shape[0], t
    cdef signed char e
    se_arr = np.empty(n, dtype=np.int8)
    sp_arr = np.empty(n, dtype=np.int8)
    cdef signed char[::1] se = se_arr
    cdef signed char[::1] sp = sp_arr
    with nogil:
        for t in range(n):
            e = 1 if u_first[t] < 0.5 else -1
            se[t] = e
            sp[t] = -e if u_malus[t] < p_keep else e
    return se_arr, sp_arr
