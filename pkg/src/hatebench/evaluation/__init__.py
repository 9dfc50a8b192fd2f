"""Metrics, experiment specs, and the cross-validation orchestrator."""

from .metrics import ConfusionMatrix, MetricsTriple, confusion, weighted_prf
from .methods import METHODS, MethodContext, MethodDef, fit_method
from .crossval import (
    ComparisonTable,
    CvObserver,
    CVReport,
    ExperimentSpec,
    PROTOCOLS,
    aggregate_reports,
    run_cv,
)

__all__ = [
    "ConfusionMatrix",
    "MetricsTriple",
    "confusion",
    "weighted_prf",
    "METHODS",
    "MethodContext",
    "MethodDef",
    "fit_method",
    "ExperimentSpec",
    "CVReport",
    "CvObserver",
    "ComparisonTable",
    "PROTOCOLS",
    "aggregate_reports",
    "run_cv",
]
