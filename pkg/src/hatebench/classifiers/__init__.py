"""Downstream classical learners consuming feature matrices."""

from .gbdt import GbdtModel, GbdtParams, train_gbdt
from .linear import ClassWeights, LinearModel, balanced_weights, train_linear

__all__ = [
    "ClassWeights",
    "LinearModel",
    "balanced_weights",
    "train_linear",
    "GbdtModel",
    "GbdtParams",
    "train_gbdt",
    "predict_labels",
]


def predict_labels(model, X):
    """One label per row, argmax of class scores with ties to the lowest class."""
    return model.predict(X)
