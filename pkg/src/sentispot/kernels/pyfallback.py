"""Pure NumPy implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable. Both
backends accumulate neighbor sums in the same offset order, so results are
bit-identical, not merely close.
"""

from __future__ import annotations

import numpy as np


def neighbor_sums(bin_flat, values, nx, ny, offsets):
    """Binary-weight neighbor count and value sum per occupied bin.

    Parameters
    ----------
    bin_flat : int64 array, sorted ascending, unique
        Row-major flat ids (``j * nx + i``) of the occupied bins.
    values : float64 array
        Field value of each occupied bin.
    nx, ny : int
        Grid dimensions; offsets falling outside are ignored.
    offsets : int (m, 2) array
        Neighborhood stencil as (dx, dy) pairs, applied in the given order.

    Returns
    -------
    counts : int64 array
        Number of occupied neighbors (the stencil includes (0, 0), so the
        bin itself always counts).
    sums : float64 array
        Sum of neighbor values in stencil order.
    """
    bin_flat = np.asarray(bin_flat, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    n = len(bin_flat)
    i = bin_flat % nx
    j = bin_flat // nx
    counts = np.zeros(n, dtype=np.int64)
    sums = np.zeros(n, dtype=np.float64)
    for dx, dy in offsets:
        ii = i + int(dx)
        jj = j + int(dy)
        ok = (ii >= 0) & (ii < nx) & (jj >= 0) & (jj < ny)
        key = jj[ok] * nx + ii[ok]
        pos = np.searchsorted(bin_flat, key)
        pos[pos == n] = n - 1 if n else 0
        hit = bin_flat[pos] == key if n else np.zeros(0, bool)
        src = np.flatnonzero(ok)[hit]
        counts[src] += 1
        sums[src] += values[pos[hit]]
    return counts, sums


def mk_batch(series, valid):
    """Mann-Kendall S and tie-corrected Var(S) per row.

    Parameters
    ----------
    series : float64 (rows, steps) array
        One time series per row; entries where ``valid`` is False are
        ignored. Valid entries must be finite.
    valid : bool (rows, steps) array

    Returns
    -------
    s : int64 array
    var_s : float64 array
    n : int64 array
        Number of valid steps per row.
    """
    series = np.asarray(series, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    rows, steps = series.shape
    s = np.zeros(rows, dtype=np.int64)
    for k in range(steps - 1):
        vk = valid[:, k]
        xk = series[:, k]
        for l in range(k + 1, steps):
            both = vk & valid[:, l]
            d = np.sign(series[:, l] - xk)
            s += np.where(both, d, 0.0).astype(np.int64)

    n = valid.sum(axis=1).astype(np.int64)

    # tie term: sum over tie groups of t(t-1)(2t+5), found by row-sorting
    # (invalid entries are pushed to +inf and excluded from equality runs)
    padded = np.where(valid, series, np.inf)
    ordered = np.sort(padded, axis=1)
    eq = (ordered[:, 1:] == ordered[:, :-1]) & np.isfinite(ordered[:, 1:])
    tie_term = np.zeros(rows, dtype=np.float64)
    if eq.size:
        prev = np.zeros((rows, 1), dtype=bool)
        nxt = np.zeros((rows, 1), dtype=bool)
        starts = eq & ~np.hstack([prev, eq[:, :-1]])
        ends = eq & ~np.hstack([eq[:, 1:], nxt])
        sr, sc = np.nonzero(starts)
        er, ec = np.nonzero(ends)
        # starts/ends pair up 1:1 in row-major order
        t = (ec - sc + 2).astype(np.float64)
        np.add.at(tie_term, sr, t * (t - 1.0) * (2.0 * t + 5.0))

    nf = n.astype(np.float64)
    var_s = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0
    var_s[var_s < 0] = 0.0
    return s, var_s, n
