"""Gradient boosted regression trees for multinomial log-loss, built natively.

Per round, one exact-split regression tree per class is fit to that class's
residual (one-hot minus softmax of the current scores) and the scores are
updated with learning_rate times the tree output. Scores start at the log
class priors, so an empty ensemble predicts the priors.

Split search runs on the presorted-feature kernels in `hatebench._kernels`
(compiled extension when available, numpy fallback otherwise).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .. import _kernels


@dataclass
class GbdtParams:
    n_rounds: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    min_samples_leaf: int = 1
    dense_cap: int = 20000  # refuse sparse inputs wider than this


@dataclass
class RegressionTree:
    """Array-encoded binary tree; feature == -1 marks leaves."""

    feature: np.ndarray  # int32 (n_nodes,)
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64, meaningful at leaves

    def predict(self, X: np.ndarray) -> np.ndarray:
        leaves = _kernels.tree_apply(self.feature, self.threshold, self.left, self.right, X)
        return self.value[leaves]

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


class _TreeBuilder:
    """Grows one regression tree; shared by both kernel backends."""

    def __init__(self, xt, sorted_idx, grad, max_depth, min_leaf):
        self.xt = xt
        self.sorted_idx = sorted_idx
        self.grad = grad
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.train_pred = np.zeros(grad.shape[0])

    def build(self, rows: np.ndarray) -> RegressionTree:
        self._grow(rows, depth=0)
        return RegressionTree(
            feature=np.array(self.feature, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=np.float64),
        )

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _grow(self, rows: np.ndarray, depth: int) -> int:
        node = self._new_node()
        if depth >= self.max_depth or rows.size < 2 * self.min_leaf or rows.size < 2:
            return self._leaf(node, rows)
        mask = np.zeros(self.grad.shape[0], dtype=np.uint8)
        mask[rows] = 1
        feat, thr, _gain = _kernels.best_split(
            self.xt, self.sorted_idx, self.grad, mask, self.min_leaf
        )
        if feat < 0:
            return self._leaf(node, rows)
        go_left = self.xt[feat, rows] <= thr
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self._grow(left_rows, depth + 1)
        self.right[node] = self._grow(right_rows, depth + 1)
        return node

    def _leaf(self, node: int, rows: np.ndarray) -> int:
        val = float(self.grad[rows].mean()) if rows.size else 0.0
        self.value[node] = val
        self.train_pred[rows] = val
        return node


@dataclass
class GbdtModel:
    params: GbdtParams
    n_classes: int
    n_features: int
    prior_scores: np.ndarray  # (n_classes,) log priors
    trees: list[list[RegressionTree]]  # [round][class]
    train_log: list[float] = field(default_factory=list)  # log-loss, index 0 = prior

    def decision_scores(self, X) -> np.ndarray:
        X = _as_dense(X, self.params.dense_cap)
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"feature width {X.shape[1]} does not match model width {self.n_features}"
            )
        scores = np.tile(self.prior_scores, (X.shape[0], 1))
        for round_trees in self.trees:
            for cls, tree in enumerate(round_trees):
                scores[:, cls] += self.params.learning_rate * tree.predict(X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.decision_scores(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1).astype(np.int64)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "schema": "hatebench/gbdt-model/1",
            "params": {
                "n_rounds": self.params.n_rounds,
                "max_depth": self.params.max_depth,
                "learning_rate": self.params.learning_rate,
                "min_samples_leaf": self.params.min_samples_leaf,
                "dense_cap": self.params.dense_cap,
            },
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "prior_scores": self.prior_scores.tolist(),
            "train_log": self.train_log,
            "trees": [
                [
                    {
                        "feature": t.feature.tolist(),
                        "threshold": t.threshold.tolist(),
                        "left": t.left.tolist(),
                        "right": t.right.tolist(),
                        "value": t.value.tolist(),
                    }
                    for t in round_trees
                ]
                for round_trees in self.trees
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GbdtModel":
        doc = json.loads(text)
        if doc.get("schema") != "hatebench/gbdt-model/1":
            raise ValueError(f"unknown GBDT model schema {doc.get('schema')!r}")
        trees = [
            [
                RegressionTree(
                    feature=np.array(t["feature"], dtype=np.int32),
                    threshold=np.array(t["threshold"], dtype=np.float64),
                    left=np.array(t["left"], dtype=np.int32),
                    right=np.array(t["right"], dtype=np.int32),
                    value=np.array(t["value"], dtype=np.float64),
                )
                for t in round_trees
            ]
            for round_trees in doc["trees"]
        ]
        return cls(
            params=GbdtParams(**doc["params"]),
            n_classes=doc["n_classes"],
            n_features=doc["n_features"],
            prior_scores=np.array(doc["prior_scores"], dtype=np.float64),
            trees=trees,
            train_log=list(doc["train_log"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GbdtModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    z = scores - scores.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(y.shape[0]), y]))


def _as_dense(X, dense_cap: int) -> np.ndarray:
    if sp.issparse(X):
        if X.shape[1] > dense_cap:
            raise ValueError(
                f"sparse input with {X.shape[1]} columns exceeds the dense cap "
                f"({dense_cap}); raise GbdtParams.dense_cap or reduce the vocabulary"
            )
        X = X.toarray()
    return np.ascontiguousarray(np.asarray(X, dtype=np.float64))


def train_gbdt(
    X,
    y: Sequence[int] | np.ndarray,
    params: GbdtParams | None = None,
    seed: int = 0,
    n_classes: int | None = None,
) -> GbdtModel:
    """Fit the boosted ensemble; deterministic (no subsampling, `seed` is
    recorded for interface stability only).

    The training multinomial log-loss is recomputed after every round and
    stored in ``model.train_log`` (index 0 is the prior-only loss).
    """
    params = params or GbdtParams()
    X = _as_dense(X, params.dense_cap)
    bad = ~np.isfinite(X)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise ValueError(f"non-finite feature value at row {row}, column {col}")
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    n, n_features = X.shape
    k = n_classes if n_classes is not None else int(y.max()) + 1

    counts = np.bincount(y, minlength=k).astype(np.float64)
    with np.errstate(divide="ignore"):
        prior = np.log(counts / n)  # -inf for absent classes keeps them at zero mass

    xt = np.ascontiguousarray(X.T)
    sorted_idx = np.argsort(X, axis=0, kind="stable").T.astype(np.int32)
    sorted_idx = np.ascontiguousarray(sorted_idx)

    scores = np.tile(prior, (n, 1))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    all_rows = np.arange(n, dtype=np.int64)

    trees: list[list[RegressionTree]] = []
    train_log = [_log_loss(scores, y)]
    for _ in range(params.n_rounds):
        probs = _softmax(scores)
        residual = onehot - probs
        round_trees = []
        for cls in range(k):
            builder = _TreeBuilder(
                xt,
                sorted_idx,
                np.ascontiguousarray(residual[:, cls]),
                params.max_depth,
                params.min_samples_leaf,
            )
            tree = builder.build(all_rows)
            scores[:, cls] += params.learning_rate * builder.train_pred
            round_trees.append(tree)
        trees.append(round_trees)
        train_log.append(_log_loss(scores, y))

    return GbdtModel(
        params=params,
        n_classes=k,
        n_features=n_features,
        prior_scores=prior,
        trees=trees,
        train_log=train_log,
    )
