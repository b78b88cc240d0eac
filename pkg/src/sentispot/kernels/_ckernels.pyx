# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same contracts as ``sentispot.kernels.pyfallback``; neighbor sums accumulate
in stencil order so both backends return bit-identical floats.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def neighbor_sums(
    const cnp.int64_t[::1] bin_flat,
    const cnp.float64_t[::1] values,
    Py_ssize_t nx,
    Py_ssize_t ny,
    const cnp.int64_t[:, ::1] offsets,
):
    cdef Py_ssize_t n = bin_flat.shape[0]
    cdef Py_ssize_t m = offsets.shape[0]
    counts_arr = np.zeros(n, dtype=np.int64)
    sums_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef cnp.float64_t[::1] sums = sums_arr
    if n == 0:
        return counts_arr, sums_arr

    # dense flat-id -> occupied-index lookup table
    index_arr = np.full(nx * ny, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] index = index_arr
    cdef Py_ssize_t t, o
    for t in range(n):
        index[bin_flat[t]] = t

    cdef cnp.int64_t i, j, ii, jj, q
    cdef cnp.int64_t c
    cdef double acc
    for t in range(n):
        i = bin_flat[t] % nx
        j = bin_flat[t] // nx
        c = 0
        acc = 0.0
        for o in range(m):
            ii = i + offsets[o, 0]
            jj = j + offsets[o, 1]
            if 0 <= ii < nx and 0 <= jj < ny:
                q = index[jj * nx + ii]
                if q >= 0:
                    c += 1
                    acc += values[q]
        counts[t] = c
        sums[t] = acc
    return counts_arr, sums_arr


def mk_batch(
    const cnp.float64_t[:, ::1] series,
    const cnp.uint8_t[:, ::1] valid_u8,
):
    cdef Py_ssize_t rows = series.shape[0]
    cdef Py_ssize_t steps = series.shape[1]
    s_arr = np.zeros(rows, dtype=np.int64)
    var_arr = np.zeros(rows, dtype=np.float64)
    n_arr = np.zeros(rows, dtype=np.int64)
    cdef cnp.int64_t[::1] s = s_arr
    cdef cnp.float64_t[::1] var_s = var_arr
    cdef cnp.int64_t[::1] nvalid = n_arr

    buf_arr = np.empty(steps, dtype=np.float64)
    cdef cnp.float64_t[::1] buf = buf_arr

    cdef Py_ssize_t r, k, l, nv, run
    cdef cnp.int64_t acc
    cdef double d, key, tie, tf, nf
    for r in range(rows):
        nv = 0
        for k in range(steps):
            if valid_u8[r, k]:
                buf[nv] = series[r, k]
                nv += 1
        nvalid[r] = nv

        acc = 0
        for k in range(nv - 1):
            for l in range(k + 1, nv):
                d = buf[l] - buf[k]
                if d > 0:
                    acc += 1
                elif d < 0:
                    acc -= 1
        s[r] = acc

        # insertion sort (nv is small) then tie-group run lengths
        for k in range(1, nv):
            key = buf[k]
            l = k - 1
            while l >= 0 and buf[l] > key:
                buf[l + 1] = buf[l]
                l -= 1
            buf[l + 1] = key
        tie = 0.0
        run = 1
        for k in range(1, nv):
            if buf[k] == buf[k - 1]:
                run += 1
            else:
                if run > 1:
                    tf = <double> run
                    tie += tf * (tf - 1.0) * (2.0 * tf + 5.0)
                run = 1
        if run > 1:
            tf = <double> run
            tie += tf * (tf - 1.0) * (2.0 * tf + 5.0)

        nf = <double> nv
        d = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie) / 18.0
        var_s[r] = d if d > 0.0 else 0.0
    return s_arr, var_arr, n_arr
