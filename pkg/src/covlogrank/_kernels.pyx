# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Semantics match ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

cdef enum:
    SIMPLE = 0
    PERMUTED_BLOCK = 1


def score_pass(const double[::1] time, const cnp.int64_t[::1] event,
               const cnp.int64_t[::1] arm, const cnp.int64_t[::1] stratum,
               Py_ssize_t n_strata, double theta):
    cdef Py_ssize_t n = time.shape[0]
    cdef Py_ssize_t start, end, k, i, s
    cdef double et = exp(theta)
    cdef double score = 0.0, info = 0.0
    cdef double t, ey1, s0, d

    cdef cnp.int64_t[::1] order = np.argsort(np.asarray(time), kind="stable").astype(np.int64)
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] y1 = np.zeros(n_strata)
    cdef double[::1] y0 = np.zeros(n_strata)
    cdef double[::1] d1 = np.zeros(n_strata)
    cdef double[::1] d0 = np.zeros(n_strata)
    cdef double[::1] w1 = np.zeros(n_strata)
    cdef double[::1] w0 = np.zeros(n_strata)
    cdef double[::1] comp1 = np.zeros(n_strata)
    cdef double[::1] comp0 = np.zeros(n_strata)

    for i in range(n):
        if arm[i]:
            y1[stratum[i]] += 1.0
        else:
            y0[stratum[i]] += 1.0

    start = 0
    while start < n:
        t = time[order[start]]
        end = start
        while end < n and time[order[end]] == t:
            i = order[end]
            if event[i]:
                if arm[i]:
                    d1[stratum[i]] += 1.0
                else:
                    d0[stratum[i]] += 1.0
            end += 1

        for s in range(n_strata):
            d = d1[s] + d0[s]
            if d > 0.0:
                ey1 = et * y1[s]
                s0 = ey1 + y0[s]
                w1[s] = y0[s] / s0
                w0[s] = ey1 / s0
                score += d1[s] - d * ey1 / s0
                info += d * ey1 * y0[s] / (s0 * s0)
                comp1[s] += w1[s] * et * d / s0
                comp0[s] += w0[s] * d / s0

        for k in range(start, end):
            i = order[k]
            s = stratum[i]
            if arm[i]:
                out[i] = (w1[s] if event[i] else 0.0) - comp1[s]
                y1[s] -= 1.0
            else:
                out[i] = (w0[s] if event[i] else 0.0) - comp0[s]
                y0[s] -= 1.0
            d1[s] = 0.0
            d0[s] = 0.0
        start = end

    return score, info, out_arr


def assign_sequence(int kind, const cnp.int64_t[:, ::1] levels,
                    const cnp.int64_t[::1] stratum, const double[::1] uniforms,
                    double pi, cnp.int64_t n_ones, cnp.int64_t block_size,
                    double p_prefer, Py_ssize_t n_cells, Py_ssize_t n_strata):
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t i, j, s, m
    cdef int a
    cdef cnp.int64_t imb1, imb0, dc
    cdef double u
    arms_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] arms = arms_arr
    cdef cnp.int64_t[::1] rem_ones, rem_slots, diff

    if kind == SIMPLE:
        for i in range(n):
            arms[i] = 1 if uniforms[i] < pi else 0
        return arms_arr

    if kind == PERMUTED_BLOCK:
        rem_ones = np.zeros(n_strata, dtype=np.int64)
        rem_slots = np.zeros(n_strata, dtype=np.int64)
        for i in range(n):
            s = stratum[i]
            if rem_slots[s] == 0:
                rem_ones[s] = n_ones
                rem_slots[s] = block_size
            a = 1 if uniforms[i] * <double>rem_slots[s] < <double>rem_ones[s] else 0
            rem_ones[s] -= a
            rem_slots[s] -= 1
            arms[i] = a
        return arms_arr

    diff = np.zeros(n_cells, dtype=np.int64)
    m = levels.shape[1]
    for i in range(n):
        imb1 = 0
        imb0 = 0
        for j in range(m):
            dc = diff[levels[i, j]]
            imb1 += dc + 1 if dc + 1 >= 0 else -(dc + 1)
            imb0 += dc - 1 if dc - 1 >= 0 else -(dc - 1)
        u = uniforms[i]
        if imb1 == imb0:
            a = 1 if u < 0.5 else 0
        elif imb1 < imb0:
            a = 1 if u < p_prefer else 0
        else:
            a = 0 if u < p_prefer else 1
        for j in range(m):
            diff[levels[i, j]] += 1 if a else -1
        arms[i] = a
    return arms_arr
