"""
Binary classification metrics.

ROC-AUC is the tie-aware rank statistic (equal scores credit 0.5),
PR-AUC is average precision (step sum over distinct score thresholds),
threshold metrics predict positive when score >= threshold. Precision is 0
with no predicted positives and MCC is 0 when its denominator vanishes.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import (
    average_precision_score,
    confusion_matrix,
    matthews_corrcoef,
    precision_recall_fscore_support,
    roc_auc_score,
)

DEFAULT_THRESHOLD = 0.5
METRIC_NAMES = ("roc_auc", "pr_auc", "accuracy", "mcc", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class MetricSet:
    """All evaluation metrics of one score vector at one threshold."""

    roc_auc: float
    pr_auc: float
    accuracy: float
    mcc: float
    precision: float
    recall: float
    f1: float
    threshold_used: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        for name in METRIC_NAMES:
            value = getattr(self, name)
            low = -1.0 if name == "mcc" else 0.0
            if not (low - 1e-12 <= value <= 1.0 + 1e-12):
                raise ValueError(f"{name} out of range: {value}")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in (*METRIC_NAMES, "threshold_used")}


def _check(y: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.int64)
    s = np.asarray(s, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ValueError(f"labels and scores must be equal-length vectors, got {y.shape} and {s.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be binary (0/1)")
    return y, s


def _require_both_classes(y: np.ndarray, metric: str) -> None:
    if y.sum() == 0 or y.sum() == len(y):
        raise ValueError(f"{metric} is undefined when labels contain a single class")


def _predict(s: np.ndarray, threshold: float) -> np.ndarray:
    return (s >= threshold).astype(np.int64)


def roc_auc(y: np.ndarray, s: np.ndarray) -> float:
    """P(score of random positive > random negative), ties counted 0.5."""
    y, s = _check(y, s)
    _require_both_classes(y, "roc_auc")
    return float(roc_auc_score(y, s))


def average_precision(y: np.ndarray, s: np.ndarray) -> float:
    """Sum over distinct thresholds of (recall step) x (precision at that threshold)."""
    y, s = _check(y, s)
    _require_both_classes(y, "pr_auc")
    return float(average_precision_score(y, s))


def confusion(y: np.ndarray, s: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> ConfusionCounts:
    y, s = _check(y, s)
    tn, fp, fn, tp = confusion_matrix(y, _predict(s, threshold), labels=[0, 1]).ravel()
    return ConfusionCounts(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def mcc(y: np.ndarray, s: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> float:
    y, s = _check(y, s)
    return float(matthews_corrcoef(y, _predict(s, threshold)))


def precision_recall_f1(
    y: np.ndarray, s: np.ndarray, threshold: float = DEFAULT_THRESHOLD
) -> tuple[float, float, float]:
    """Positive-class precision, recall and F1; undefined ratios are 0."""
    y, s = _check(y, s)
    precision, recall, f1, _ = precision_recall_fscore_support(
        y, _predict(s, threshold), labels=[0, 1], pos_label=1, average="binary", zero_division=0
    )
    return float(precision), float(recall), float(f1)


def binary_metrics(y: np.ndarray, s: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> MetricSet:
    """
    Compute the full metric set.

    Args:
        y: Binary labels (both classes required)
        s: Scores
        threshold: Decision threshold for the confusion-matrix metrics

    Returns:
        MetricSet

    Raises:
        ValueError: Length mismatch or single-class labels
    """
    y, s = _check(y, s)
    counts = confusion(y, s, threshold)
    precision, recall, f1 = precision_recall_f1(y, s, threshold)
    return MetricSet(
        roc_auc=roc_auc(y, s),
        pr_auc=average_precision(y, s),
        accuracy=(counts.tp + counts.tn) / len(y),
        mcc=mcc(y, s, threshold),
        precision=precision,
        recall=recall,
        f1=f1,
        threshold_used=threshold,
    )
