"""Linear baselines: multinomial logistic regression and class-weighted SVM.

Fitting is delegated to scikit-learn's solvers (lbfgs / liblinear); the
fitted coefficients are extracted into a plain :class:`LinearModel` whose
prediction rule (argmax of scores, ties to the lowest class index) is owned
here.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.svm import LinearSVC

ClassWeights = dict[int, float]


def balanced_weights(class_counts: Mapping) -> ClassWeights:
    """w_c = N / (K * n_c); inversely proportional to class frequency.

    Satisfies sum_c w_c * n_c == N exactly for exact divisions.
    """
    counts = {int(label): int(count) for label, count in class_counts.items()}
    for label, count in counts.items():
        if count <= 0:
            raise ValueError(f"class {label} has zero count; balanced weights undefined")
    total = sum(counts.values())
    k = len(counts)
    return {label: total / (k * count) for label, count in counts.items()}


@dataclass
class LinearModel:
    """Linear scorer: scores = X @ weights.T + bias, prediction = argmax."""

    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    loss: str  # "logistic" | "hinge"
    C: float
    converged: bool

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def scores(self, X) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"feature width {X.shape[1]} does not match model width {self.n_features}"
            )
        return np.asarray(X @ self.weights.T) + self.bias

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1).astype(np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "hatebench/linear-model/1",
                "loss": self.loss,
                "C": self.C,
                "converged": self.converged,
                "weights": self.weights.tolist(),
                "bias": self.bias.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        doc = json.loads(text)
        if doc.get("schema") != "hatebench/linear-model/1":
            raise ValueError(f"unknown linear model schema {doc.get('schema')!r}")
        return cls(
            weights=np.array(doc["weights"], dtype=np.float64),
            bias=np.array(doc["bias"], dtype=np.float64),
            loss=doc["loss"],
            C=doc["C"],
            converged=doc["converged"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LinearModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def train_linear(
    X,
    y,
    loss: str = "logistic",
    weights: ClassWeights | None = None,
    C: float = 1.0,
    seed: int = 0,
    n_classes: int | None = None,
    max_iter: int = 2000,
) -> LinearModel:
    """Fit a linear classifier on dense or sparse features.

    loss="logistic" is L2-regularized multinomial logistic regression;
    loss="hinge" is a one-vs-rest L2-regularized linear SVM. Optional
    per-class weights scale each class's loss term. A single-class ``y``
    degenerates to a constant model with a warning.
    """
    if loss not in ("logistic", "hinge"):
        raise ValueError(f"unknown loss {loss!r}")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    k = n_classes if n_classes is not None else int(y.max()) + 1

    present = np.unique(y)
    if present.size == 1:
        warnings.warn("training labels contain a single class; returning a constant model")
        bias = np.zeros(k)
        bias[int(present[0])] = 1.0
        return LinearModel(
            weights=np.zeros((k, X.shape[1])), bias=bias, loss=loss, C=C, converged=True
        )

    if loss == "logistic":
        est = LogisticRegression(
            C=C, class_weight=weights, max_iter=max_iter, random_state=seed, tol=1e-6
        )
    else:
        est = LinearSVC(
            C=C,
            loss="hinge",
            class_weight=weights,
            max_iter=max_iter * 5,
            random_state=seed,
            tol=1e-5,
        )
    converged = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        est.fit(X, y)
        converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)

    coef = np.asarray(est.coef_, dtype=np.float64)
    intercept = np.asarray(est.intercept_, dtype=np.float64)
    if coef.shape[0] == 1:  # binary fit: expand to explicit two-class scores
        coef = np.vstack([-coef[0], coef[0]])
        intercept = np.array([-intercept[0], intercept[0]])

    weights_full = np.zeros((k, X.shape[1]))
    bias_full = np.zeros(k)
    for row, cls in enumerate(present):  # est.classes_ is sorted(unique(y))
        weights_full[int(cls)] = coef[row]
        bias_full[int(cls)] = intercept[row]
    # classes never seen in training keep zero weights; push them below the rest
    absent = np.setdiff1d(np.arange(k), present)
    if absent.size:
        bias_full[absent] = float(bias_full[present].min()) - 1e6

    return LinearModel(weights=weights_full, bias=bias_full, loss=loss, C=C, converged=converged)
