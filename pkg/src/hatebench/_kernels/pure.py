"""Numpy fallback for the split-search and tree-walk kernels.

Gain arithmetic mirrors the compiled kernel expression-for-expression
(including summation order, which follows each feature's sort order) so the
two backends grow bitwise-identical trees.
"""

from __future__ import annotations

import numpy as np

MIN_GAIN = 1e-12


def best_split(
    xt: np.ndarray,
    sorted_idx: np.ndarray,
    grad: np.ndarray,
    mask: np.ndarray,
    min_leaf: int,
) -> tuple[int, float, float]:
    """Best variance-reduction split over all features for one node.

    xt: (F, n) feature-major values; sorted_idx: (F, n) per-feature argsort
    of the full column; grad: (n,) regression targets; mask: (n,) uint8 node
    membership. Returns (feature, threshold, gain) with feature == -1 when no
    candidate improves by more than MIN_GAIN. Thresholds are midpoints
    between adjacent distinct values; ties in gain keep the lowest feature
    and lowest threshold.
    """
    n_feat = xt.shape[0]
    member = mask.view(bool)
    best_f = -1
    best_thr = 0.0
    best_gain = MIN_GAIN
    for f in range(n_feat):
        order = sorted_idx[f]
        order = order[member[order]]
        m = order.size
        if m < 2 or m < 2 * min_leaf:
            break  # membership is identical for every feature
        v = xt[f, order]
        g = grad[order]
        cum = np.cumsum(g)
        s = cum[-1]
        nl = np.arange(1, m, dtype=np.float64)
        ok = (v[1:] > v[:-1]) & (nl >= min_leaf) & ((m - nl) >= min_leaf)
        if not ok.any():
            continue
        sl = cum[:-1]
        sr = s - sl
        gains = sl * sl / nl + sr * sr / (m - nl) - s * s / m
        gains[~ok] = -np.inf
        j = int(np.argmax(gains))
        gain = float(gains[j])
        if gain > best_gain:
            best_f = f
            best_thr = (float(v[j]) + float(v[j + 1])) / 2.0
            best_gain = gain
    if best_f < 0:
        return -1, 0.0, 0.0
    return best_f, best_thr, best_gain


def tree_apply(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Route every row of ``x`` to its leaf; returns leaf node ids.

    Internal nodes send a row left when value <= threshold; feature == -1
    marks leaves.
    """
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = feature[node] >= 0
    while active.any():
        rows = np.flatnonzero(active)
        cur = node[rows]
        f = feature[cur]
        go_left = x[rows, f] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])
        active = feature[node] >= 0
    return node
