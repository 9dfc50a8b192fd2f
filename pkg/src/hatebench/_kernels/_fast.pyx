# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled split-search and tree-walk kernels.

Must stay arithmetically identical to ``pure.py``: same gain expression,
same summation order (per-feature sort order), same tie-breaking, so both
backends grow the same trees bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

MIN_GAIN = 1e-12
cdef double _MIN_GAIN = 1e-12


def best_split(double[:, ::1] xt, int[:, ::1] sorted_idx, double[::1] grad,
               unsigned char[::1] mask, int min_leaf):
    cdef Py_ssize_t n_feat = xt.shape[0]
    cdef Py_ssize_t n = xt.shape[1]
    cdef cnp.ndarray[double, ndim=1] vbuf_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gbuf_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] vbuf = vbuf_arr
    cdef double[::1] gbuf = gbuf_arr

    cdef int best_f = -1
    cdef double best_thr = 0.0
    cdef double best_gain = _MIN_GAIN
    cdef Py_ssize_t f, i, p, m, idx
    cdef double s, suml, sr, gain, nl, nr

    for f in range(n_feat):
        m = 0
        for i in range(n):
            idx = sorted_idx[f, i]
            if mask[idx]:
                vbuf[m] = xt[f, idx]
                gbuf[m] = grad[idx]
                m += 1
        if m < 2 or m < 2 * min_leaf:
            break  # membership is identical for every feature
        s = 0.0
        for p in range(m):
            s += gbuf[p]
        suml = 0.0
        for p in range(m - 1):
            suml += gbuf[p]
            if vbuf[p + 1] > vbuf[p] and p + 1 >= min_leaf and m - p - 1 >= min_leaf:
                nl = <double> (p + 1)
                nr = <double> (m - p - 1)
                sr = s - suml
                gain = suml * suml / nl + sr * sr / nr - s * s / (<double> m)
                if gain > best_gain:
                    best_f = <int> f
                    best_thr = (vbuf[p] + vbuf[p + 1]) / 2.0
                    best_gain = gain
    if best_f < 0:
        return -1, 0.0, 0.0
    return best_f, best_thr, best_gain


def tree_apply(int[::1] feature, double[::1] threshold, int[::1] left,
               int[::1] right, double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[int, ndim=1] node_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] node = node_arr
    cdef Py_ssize_t i
    cdef int cur

    for i in range(n):
        cur = 0
        while feature[cur] >= 0:
            if x[i, feature[cur]] <= threshold[cur]:
                cur = left[cur]
            else:
                cur = right[cur]
        node[i] = cur
    return node_arr
