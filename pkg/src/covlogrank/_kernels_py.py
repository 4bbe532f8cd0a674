"""Pure numpy/Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` argument for argument and are used when the
compiled extension is unavailable (or ``COVLOGRANK_PURE=1``).
"""

import numpy as np

SIMPLE, PERMUTED_BLOCK, MINIMIZATION = 0, 1, 2


def score_pass(time, event, arm, stratum, n_strata, theta):
    """Partial-likelihood score, its negative derivative, and derived outcomes.

    Returns ``(score_sum, info_sum, outcomes)`` where the two sums are not yet
    divided by ``n``. Strata are coded ``0 .. n_strata-1``; risk sets are
    formed within strata.
    """
    n = time.shape[0]
    et = np.exp(theta)
    outcomes = np.zeros(n)
    score = 0.0
    info = 0.0
    single = n_strata == 1
    for s in range(n_strata):
        if single:
            idx = slice(None)
            t, e, a = time, event, arm
        else:
            idx = np.flatnonzero(stratum == s)
            t, e, a = time[idx], event[idx], arm[idx]
        ev = e.astype(bool)
        if not ev.any():
            continue
        uts = np.unique(t[ev])
        t1 = np.sort(t[a == 1])
        t0 = np.sort(t[a == 0])
        y1 = (t1.shape[0] - np.searchsorted(t1, uts, side="left")).astype(np.float64)
        y0 = (t0.shape[0] - np.searchsorted(t0, uts, side="left")).astype(np.float64)
        k_ev = np.searchsorted(uts, t[ev])
        d1 = np.bincount(k_ev[a[ev] == 1], minlength=uts.shape[0]).astype(np.float64)
        d0 = np.bincount(k_ev[a[ev] == 0], minlength=uts.shape[0]).astype(np.float64)
        d = d1 + d0

        ey1 = et * y1
        s0 = ey1 + y0
        w1 = y0 / s0
        w0 = ey1 / s0
        score += float(np.sum(d1 - d * ey1 / s0))
        info += float(np.sum(d * ey1 * y0 / (s0 * s0)))
        comp1 = np.cumsum(w1 * et * d / s0)
        comp0 = np.cumsum(w0 * d / s0)

        k = np.searchsorted(uts, t, side="right") - 1
        has = k >= 0
        kk = np.where(has, k, 0)
        is1 = a == 1
        comp = np.where(has, np.where(is1, comp1[kk], comp0[kk]), 0.0)
        jump = np.where(ev, np.where(is1, w1[kk], w0[kk]), 0.0)
        outcomes[idx] = jump - comp
    return score, info, outcomes


def assign_sequence(kind, levels, stratum, uniforms, pi, n_ones, block_size,
                    p_prefer, n_cells, n_strata):
    """Sequential treatment assignment driven by one uniform per patient.

    ``levels`` is an (n, m) array of margin cells already offset into a flat
    table of ``n_cells`` cells (minimization); ``stratum`` holds block strata.
    """
    n = uniforms.shape[0]
    arms = np.zeros(n, dtype=np.int8)
    if kind == SIMPLE:
        for i in range(n):
            arms[i] = 1 if uniforms[i] < pi else 0
        return arms
    if kind == PERMUTED_BLOCK:
        rem_ones = [0] * n_strata
        rem_slots = [0] * n_strata
        for i in range(n):
            s = int(stratum[i])
            if rem_slots[s] == 0:
                rem_ones[s] = n_ones
                rem_slots[s] = block_size
            a = 1 if uniforms[i] * rem_slots[s] < rem_ones[s] else 0
            rem_ones[s] -= a
            rem_slots[s] -= 1
            arms[i] = a
        return arms
    # minimization: diff[c] = (#arm 1) - (#arm 0) in margin cell c
    diff = [0] * n_cells
    m = levels.shape[1]
    for i in range(n):
        imb1 = 0
        imb0 = 0
        for j in range(m):
            dc = diff[int(levels[i, j])]
            imb1 += abs(dc + 1)
            imb0 += abs(dc - 1)
        u = uniforms[i]
        if imb1 == imb0:
            a = 1 if u < 0.5 else 0
        elif imb1 < imb0:
            a = 1 if u < p_prefer else 0
        else:
            a = 0 if u < p_prefer else 1
        step = 1 if a else -1
        for j in range(m):
            diff[int(levels[i, j])] += step
        arms[i] = a
    return arms
