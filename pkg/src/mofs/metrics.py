"""Binary detection metrics.

Attack rows are the positive class (label 1), normal rows negative (label 0).
"""

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of a binary prediction against ground truth."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise UndefinedMetricError(f"negative count: {name}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricReport:
    """Bundle of headline metrics for one feature subset on one table."""

    subset_size: int
    accuracy: float
    detection_rate: float
    f1: float
    feature_reduction: float


def confusion(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionMatrix:
    """Count tp/fp/tn/fn; labels must be 0/1 arrays of equal length."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise UndefinedMetricError("label vectors must be 1-d and equal length")
    if y_true.size == 0:
        raise UndefinedMetricError("empty label vectors")
    for arr, name in ((y_true, "y_true"), (y_pred, "y_pred")):
        if not np.isin(arr, (0, 1)).all():
            raise UndefinedMetricError(f"{name} contains labels other than 0/1")
    pos = y_true == 1
    pred_pos = y_pred == 1
    return ConfusionMatrix(
        tp=int(np.sum(pos & pred_pos)),
        fp=int(np.sum(~pos & pred_pos)),
        tn=int(np.sum(~pos & ~pred_pos)),
        fn=int(np.sum(pos & ~pred_pos)),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    """(tp + tn) / (tp + fn + fp + tn)."""
    if cm.total == 0:
        raise UndefinedMetricError("accuracy undefined for zero total")
    return (cm.tp + cm.tn) / cm.total


def detection_rate(cm: ConfusionMatrix) -> float:
    """tp / (tp + fn): share of attack rows flagged as attacks."""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("detection rate undefined without attack rows")
    return cm.tp / (cm.tp + cm.fn)


def f1(cm: ConfusionMatrix) -> float:
    """2*tp / (2*tp + fp + fn), attacks positive."""
    denom = 2 * cm.tp + cm.fp + cm.fn
    if denom == 0:
        raise UndefinedMetricError("f1 undefined: no attacks present or predicted")
    return 2 * cm.tp / denom


def feature_reduction(subset_size: int, total_features: int) -> float:
    """1 - subset_size / total_features."""
    if total_features <= 0:
        raise UndefinedMetricError("total feature count must be positive")
    if not 0 <= subset_size <= total_features:
        raise UndefinedMetricError(
            f"subset size {subset_size} outside [0, {total_features}]"
        )
    return 1.0 - subset_size / total_features
