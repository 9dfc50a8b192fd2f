"""Confusion matrices and support-weighted macro precision/recall/F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ConfusionMatrix = np.ndarray  # (K, K) counts, rows = true class, cols = predicted


@dataclass(frozen=True)
class MetricsTriple:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def confusion(y_true, y_pred, n_classes: int = 3) -> ConfusionMatrix:
    """Count matrix over (true, predicted) pairs with a fixed class order."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(
            f"length mismatch: {y_true.shape[0]} true labels vs {y_pred.shape[0]} predictions"
        )
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def per_class_prf(cm: ConfusionMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-class precision/recall/F1 with the zero conventions: a class with
    no predictions has precision 0, no true members recall 0, and F1 is 0
    whenever precision + recall is."""
    diag = np.diag(cm).astype(np.float64)
    pred_totals = cm.sum(axis=0).astype(np.float64)
    true_totals = cm.sum(axis=1).astype(np.float64)
    precision = np.divide(diag, pred_totals, out=np.zeros_like(diag), where=pred_totals > 0)
    recall = np.divide(diag, true_totals, out=np.zeros_like(diag), where=true_totals > 0)
    pr = precision + recall
    f1 = np.divide(2.0 * precision * recall, pr, out=np.zeros_like(diag), where=pr > 0)
    return precision, recall, f1


def weighted_prf(cm: ConfusionMatrix) -> MetricsTriple:
    """Support-weighted average of the per-class metrics.

    The weighted recall is computed as trace/total, which is algebraically
    what the support weighting reduces to, so it equals overall accuracy
    exactly rather than only up to rounding.
    """
    total = int(cm.sum())
    if total == 0:
        raise ValueError("cannot compute metrics for an empty confusion matrix")
    precision, _, f1 = per_class_prf(cm)
    support = cm.sum(axis=1).astype(np.float64)
    weights = support / total
    return MetricsTriple(
        precision=float(weights @ precision),
        recall=float(np.trace(cm) / total),
        f1=float(weights @ f1),
    )
