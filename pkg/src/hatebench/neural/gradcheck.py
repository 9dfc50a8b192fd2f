"""Central-difference verification of the analytic gradients."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..utils import derive_seed
from .encoding import PAD
from .nets import EmbeddingInit, NetSpec, build_net, make_embedding_matrix


def gradient_check(
    spec: NetSpec,
    init: EmbeddingInit,
    batch: tuple[np.ndarray, np.ndarray, np.ndarray],
    epsilon: float = 1e-5,
    seed: int = 0,
    n_samples: int = 200,
    n_embedding: int = 20,
    analytic_scale: float = 1.0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``batch`` is (indices, mask, labels) as produced by ``encode_batch``;
    at least ``n_samples`` parameter coordinates are probed, of which at
    least ``n_embedding`` come from embedding rows of tokens present in the
    batch. Dropout is disabled so the loss is a deterministic function of
    the parameters. ``analytic_scale`` deliberately corrupts the analytic
    side; it exists so tests can confirm the checker catches faults.
    """
    idx, mask, y = batch
    if idx.shape[0] > 8:
        raise ValueError("gradient check batches are limited to 8 examples")
    vocab_size = max(int(idx.max()) + 1, 2)
    vocab = {f"w{i}": i for i in range(vocab_size)}
    embed = make_embedding_matrix(vocab, spec.embedding_dim, init)
    net = build_net(spec, vocab, embed, seed=derive_seed("gradcheck-net", seed))

    def loss_at() -> float:
        loss, _ = net.loss_and_grads(idx, mask, y, train=False, rng=None)
        return loss

    _, grads = net.loss_and_grads(idx, mask, y, train=False, rng=None)

    rng = np.random.default_rng(derive_seed("gradcheck-sample", seed))
    coords: list[tuple[str, int]] = []

    present_rows = np.unique(idx[mask]) if mask.any() else np.array([], dtype=int)
    present_rows = present_rows[present_rows != PAD]
    if present_rows.size:
        dim = spec.embedding_dim
        flat = np.array(
            [row * dim + col for row in present_rows for col in range(dim)], dtype=np.int64
        )
        take = min(n_embedding, flat.size)
        coords.extend(("embed", int(i)) for i in rng.choice(flat, size=take, replace=False))

    other = [(name, arr.size) for name, arr in net.params.items() if name != "embed"]
    total_other = sum(size for _, size in other)
    want = max(n_samples - len(coords), 0)
    if want >= total_other:
        coords.extend((name, i) for name, size in other for i in range(size))
    else:
        picks = rng.choice(total_other, size=want, replace=False)
        offsets = np.cumsum([0] + [size for _, size in other])
        for p in np.sort(picks):
            slot = int(np.searchsorted(offsets, p, side="right")) - 1
            coords.append((other[slot][0], int(p - offsets[slot])))

    max_rel = 0.0
    for name, flat_i in coords:
        arr = net.params[name]
        orig = arr.flat[flat_i]
        arr.flat[flat_i] = orig + epsilon
        f_plus = loss_at()
        arr.flat[flat_i] = orig - epsilon
        f_minus = loss_at()
        arr.flat[flat_i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise FloatingPointError(
                f"non-finite loss while perturbing {name}[{flat_i}]"
            )
        g_num = (f_plus - f_minus) / (2.0 * epsilon)
        g_ana = float(grads[name].flat[flat_i]) * analytic_scale
        rel = abs(g_ana - g_num) / max(abs(g_ana), abs(g_num), 1e-8)
        max_rel = max(max_rel, rel)
    return max_rel
