"""The three architectures with hand-written forward/backward passes.

Everything runs in float64. Parameter layout is a flat dict of arrays so
the optimizers and the finite-difference checker can treat all models
uniformly. The PAD embedding row is pinned to zero (its gradient is
discarded), which is what makes predictions invariant to pure-PAD suffix
extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import expit

from ..embeddings import EmbeddingTable, OovPolicy, lookup
from ..utils import derive_seed
from .encoding import PAD, PAD_TOKEN, UNK_TOKEN


@dataclass(frozen=True)
class CnnSpec:
    """Multi-width convolution, rectifier, max-over-time pooling, dropout, softmax."""

    filter_widths: tuple[int, ...] = (3, 4, 5)
    maps_per_width: int = 100
    dropout: float = 0.5
    embedding_dim: int = 200
    n_classes: int = 3

    kind = "cnn"


@dataclass(frozen=True)
class LstmSpec:
    """Single recurrent layer read out at the last real token, dropout, softmax."""

    hidden_size: int = 200
    dropout: float = 0.5
    embedding_dim: int = 200
    n_classes: int = 3

    kind = "lstm"


@dataclass(frozen=True)
class FastTextSpec:
    """Mean of non-pad token embeddings into a single affine layer and softmax."""

    embedding_dim: int = 200
    n_classes: int = 3

    kind = "fasttext"


NetSpec = CnnSpec | LstmSpec | FastTextSpec


@dataclass(frozen=True)
class EmbeddingInit:
    """How the trainable embedding matrix starts out.

    "random" draws uniform(-scale, +scale) entries; "pretrained" copies rows
    from a table, falling back to the same random draw for words the table
    lacks. Both are deterministic given the seed.
    """

    kind: str  # "random" | "pretrained"
    scale: float = 0.25
    seed: int = 0
    table: EmbeddingTable | None = None

    @classmethod
    def random(cls, scale: float = 0.25, seed: int = 0) -> "EmbeddingInit":
        return cls(kind="random", scale=scale, seed=seed)

    @classmethod
    def pretrained(cls, table: EmbeddingTable, scale: float = 0.25, seed: int = 0) -> "EmbeddingInit":
        return cls(kind="pretrained", scale=scale, seed=seed, table=table)


def make_embedding_matrix(vocab: Mapping[str, int], dim: int, init: EmbeddingInit) -> np.ndarray:
    """(|vocab|, dim) float64 matrix; PAD row is zero; source table unmodified."""
    size = len(vocab)
    if init.kind == "random":
        rng = np.random.default_rng(derive_seed("embed-init", init.seed))
        matrix = rng.uniform(-init.scale, init.scale, size=(size, dim))
    elif init.kind == "pretrained":
        if init.table is None:
            raise ValueError("pretrained embedding init requires a table")
        if init.table.dim != dim:
            raise ValueError(
                f"pretrained table dimension {init.table.dim} does not match requested {dim}"
            )
        policy = OovPolicy.random(scale=init.scale, seed=init.seed)
        matrix = np.empty((size, dim))
        for word, row in vocab.items():
            matrix[row] = lookup(init.table, word, policy)
    else:
        raise ValueError(f"unknown embedding init kind {init.kind!r}")
    matrix[PAD] = 0.0
    return matrix


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_xent(logits: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy, its gradient w.r.t. the logits, and the probabilities."""
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    se = e.sum(axis=1, keepdims=True)
    probs = e / se
    loss = float(np.mean(np.log(se[:, 0]) - z[np.arange(n), y]))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    return loss, dlogits, probs


def _dropout(x: np.ndarray, p: float, train: bool, rng: np.random.Generator | None):
    """Inverted dropout; identity outside training."""
    if not train or p <= 0.0:
        return x, None
    if rng is None:
        raise ValueError("dropout in training mode needs an rng")
    keep = 1.0 - p
    mask = (rng.random(x.shape) < keep) / keep
    return x * mask, mask


class NeuralNet:
    """Shared surface: params dict, logits/backward, loss_and_grads."""

    spec: NetSpec
    params: dict[str, np.ndarray]
    vocab: dict[str, int]

    def __init__(self, spec: NetSpec, vocab: Mapping[str, int], embed: np.ndarray):
        if embed.shape != (len(vocab), spec.embedding_dim):
            raise ValueError(
                f"embedding matrix shape {embed.shape} does not match "
                f"(|vocab|={len(vocab)}, dim={spec.embedding_dim})"
            )
        self.spec = spec
        self.vocab = dict(vocab)
        self.params = {"embed": np.array(embed, dtype=np.float64)}

    # subclasses implement
    def logits(self, idx, mask, train=False, rng=None):
        raise NotImplementedError

    def backward(self, cache, dlogits):
        raise NotImplementedError

    def loss_and_grads(self, idx, mask, y, train=False, rng=None):
        z, cache = self.logits(idx, mask, train=train, rng=rng)
        loss, dz, _ = softmax_xent(z, y)
        grads = self.backward(cache, dz)
        grads["embed"][PAD] = 0.0  # PAD row stays pinned at zero
        return loss, grads

    def predict_proba_encoded(self, idx, mask) -> np.ndarray:
        z, _ = self.logits(idx, mask, train=False, rng=None)
        return softmax(z)

    def param_norms(self) -> dict[str, float]:
        return {name: float(np.linalg.norm(arr)) for name, arr in self.params.items()}


class FastTextNet(NeuralNet):
    def __init__(self, spec: FastTextSpec, vocab, embed, seed: int = 0):
        super().__init__(spec, vocab, embed)
        rng = np.random.default_rng(derive_seed("fasttext-init", seed))
        d, k = spec.embedding_dim, spec.n_classes
        self.params["out_w"] = _glorot(rng, (d, k), d, k)
        self.params["out_b"] = np.zeros(k)

    def logits(self, idx, mask, train=False, rng=None):
        embed = self.params["embed"]
        x = embed[idx]  # (B, L, D)
        m = mask.astype(np.float64)
        counts = m.sum(axis=1)
        denom = np.maximum(counts, 1.0)  # all-pad rows average to zero
        avg = (x * m[:, :, None]).sum(axis=1) / denom[:, None]
        z = avg @ self.params["out_w"] + self.params["out_b"]
        return z, (idx, m, denom, avg)

    def backward(self, cache, dlogits):
        idx, m, denom, avg = cache
        w = self.params["out_w"]
        grads = {
            "out_w": avg.T @ dlogits,
            "out_b": dlogits.sum(axis=0),
            "embed": np.zeros_like(self.params["embed"]),
        }
        davg = dlogits @ w.T  # (B, D)
        dx = (davg / denom[:, None])[:, None, :] * m[:, :, None]  # (B, L, D)
        np.add.at(grads["embed"], idx, dx)
        return grads


class CnnNet(NeuralNet):
    def __init__(self, spec: CnnSpec, vocab, embed, seed: int = 0):
        super().__init__(spec, vocab, embed)
        rng = np.random.default_rng(derive_seed("cnn-init", seed))
        d, m, k = spec.embedding_dim, spec.maps_per_width, spec.n_classes
        for w in spec.filter_widths:
            self.params[f"conv_w{w}"] = _glorot(rng, (w, d, m), w * d, m)
            self.params[f"conv_b{w}"] = np.zeros(m)
        total = len(spec.filter_widths) * m
        self.params["out_w"] = _glorot(rng, (total, k), total, k)
        self.params["out_b"] = np.zeros(k)

    def logits(self, idx, mask, train=False, rng=None):
        spec = self.spec
        embed = self.params["embed"]
        batch, length = idx.shape
        x = embed[idx]  # (B, L, D)
        wmax = max(spec.filter_widths)
        xp = np.zeros((batch, length + wmax - 1, spec.embedding_dim))
        xp[:, :length] = x
        real = mask.sum(axis=1)  # (B,)
        # a window may start at any real token position; PAD rows are zero
        valid = np.arange(length)[None, :] < real[:, None]

        pooled_parts = []
        per_width = []
        for w in spec.filter_widths:
            wc = self.params[f"conv_w{w}"]
            pre = np.broadcast_to(self.params[f"conv_b{w}"], (batch, length, spec.maps_per_width)).copy()
            for j in range(w):
                pre += xp[:, j : j + length, :] @ wc[j]
            act = np.maximum(pre, 0.0)
            masked = np.where(valid[:, :, None], act, -np.inf)
            amax = masked.argmax(axis=1)  # (B, M); ties -> first position
            pooled = np.take_along_axis(masked, amax[:, None, :], axis=1)[:, 0, :]
            pooled = np.where(real[:, None] > 0, pooled, 0.0)
            pooled_parts.append(pooled)
            per_width.append((w, pre, amax))
        h = np.concatenate(pooled_parts, axis=1)
        hdrop, dmask = _dropout(h, spec.dropout, train, rng)
        z = hdrop @ self.params["out_w"] + self.params["out_b"]
        return z, (idx, xp, real, per_width, hdrop, dmask)

    def backward(self, cache, dlogits):
        spec = self.spec
        idx, xp, real, per_width, hdrop, dmask = cache
        batch, length = idx.shape
        m = spec.maps_per_width

        grads = {
            "out_w": hdrop.T @ dlogits,
            "out_b": dlogits.sum(axis=0),
            "embed": np.zeros_like(self.params["embed"]),
        }
        dh = dlogits @ self.params["out_w"].T
        if dmask is not None:
            dh = dh * dmask

        dxp = np.zeros_like(xp)
        for part, (w, pre, amax) in enumerate(per_width):
            dpooled = dh[:, part * m : (part + 1) * m].copy()
            dpooled[real == 0] = 0.0
            dact = np.zeros_like(pre)
            np.put_along_axis(dact, amax[:, None, :], dpooled[:, None, :], axis=1)
            dpre = dact * (pre > 0.0)
            wc = self.params[f"conv_w{w}"]
            dwc = np.empty_like(wc)
            for j in range(w):
                dxp[:, j : j + length, :] += dpre @ wc[j].T
                dwc[j] = np.tensordot(xp[:, j : j + length, :], dpre, axes=([0, 1], [0, 1]))
            grads[f"conv_w{w}"] = dwc
            grads[f"conv_b{w}"] = dpre.sum(axis=(0, 1))
        np.add.at(grads["embed"], idx, dxp[:, :length, :])
        return grads


class LstmNet(NeuralNet):
    def __init__(self, spec: LstmSpec, vocab, embed, seed: int = 0):
        super().__init__(spec, vocab, embed)
        rng = np.random.default_rng(derive_seed("lstm-init", seed))
        d, h, k = spec.embedding_dim, spec.hidden_size, spec.n_classes
        self.params["wx"] = _glorot(rng, (d, 4 * h), d, 4 * h)
        self.params["wh"] = _glorot(rng, (h, 4 * h), h, 4 * h)
        bias = np.zeros(4 * h)
        bias[h : 2 * h] = 1.0  # forget-gate bias starts open
        self.params["b"] = bias
        self.params["out_w"] = _glorot(rng, (h, k), h, k)
        self.params["out_b"] = np.zeros(k)

    def logits(self, idx, mask, train=False, rng=None):
        spec = self.spec
        hsz = spec.hidden_size
        embed = self.params["embed"]
        wx, wh, b = self.params["wx"], self.params["wh"], self.params["b"]
        batch, length = idx.shape
        x = embed[idx]
        maskf = mask.astype(np.float64)

        h = np.zeros((batch, hsz))
        c = np.zeros((batch, hsz))
        steps = []
        for t in range(length):
            xt = x[:, t, :]
            m = maskf[:, t : t + 1]
            zg = xt @ wx + h @ wh + b
            gi = expit(zg[:, :hsz])
            gf = expit(zg[:, hsz : 2 * hsz])
            gg = np.tanh(zg[:, 2 * hsz : 3 * hsz])
            go = expit(zg[:, 3 * hsz :])
            c_new = gf * c + gi * gg
            tc = np.tanh(c_new)
            h_new = go * tc
            steps.append((xt, m, gi, gf, gg, go, c, tc, h))
            # masked carry: pad steps leave the state untouched
            h = m * h_new + (1.0 - m) * h
            c = m * c_new + (1.0 - m) * c
        hdrop, dmask = _dropout(h, spec.dropout, train, rng)
        z = hdrop @ self.params["out_w"] + self.params["out_b"]
        return z, (idx, steps, hdrop, dmask, batch, length)

    def backward(self, cache, dlogits):
        spec = self.spec
        hsz = spec.hidden_size
        idx, steps, hdrop, dmask, batch, length = cache
        wx, wh = self.params["wx"], self.params["wh"]

        grads = {
            "out_w": hdrop.T @ dlogits,
            "out_b": dlogits.sum(axis=0),
            "embed": np.zeros_like(self.params["embed"]),
            "wx": np.zeros_like(wx),
            "wh": np.zeros_like(wh),
            "b": np.zeros_like(self.params["b"]),
        }
        dh = dlogits @ self.params["out_w"].T
        if dmask is not None:
            dh = dh * dmask
        dc = np.zeros((batch, hsz))
        dx = np.zeros((batch, length, spec.embedding_dim))

        for t in reversed(range(length)):
            xt, m, gi, gf, gg, go, c_prev, tc, h_prev = steps[t]
            dh_new = dh * m
            dh_skip = dh * (1.0 - m)
            dc_new = dc * m + dh_new * go * (1.0 - tc * tc)
            dc_skip = dc * (1.0 - m)
            dgo = dh_new * tc
            dgf = dc_new * c_prev
            dgi = dc_new * gg
            dgg = dc_new * gi
            dzg = np.concatenate(
                [
                    dgi * gi * (1.0 - gi),
                    dgf * gf * (1.0 - gf),
                    dgg * (1.0 - gg * gg),
                    dgo * go * (1.0 - go),
                ],
                axis=1,
            )
            grads["wx"] += xt.T @ dzg
            grads["wh"] += h_prev.T @ dzg
            grads["b"] += dzg.sum(axis=0)
            dx[:, t, :] = dzg @ wx.T
            dh = dzg @ wh.T + dh_skip
            dc = dc_new * gf + dc_skip
        np.add.at(grads["embed"], idx, dx)
        return grads


def build_net(spec: NetSpec, vocab: Mapping[str, int], embed: np.ndarray, seed: int = 0) -> NeuralNet:
    if isinstance(spec, CnnSpec):
        return CnnNet(spec, vocab, embed, seed=seed)
    if isinstance(spec, LstmSpec):
        return LstmNet(spec, vocab, embed, seed=seed)
    if isinstance(spec, FastTextSpec):
        return FastTextNet(spec, vocab, embed, seed=seed)
    raise TypeError(f"unknown spec type {type(spec).__name__}")
