"""
Decision-threshold sensitivity.

Precision, recall and F1 are evaluated directly at each point of a
threshold grid (default 0.00..1.00 step 0.01) for every fold and averaged
pointwise across folds. The operating point is the grid threshold with
the highest mean F1, lowest threshold on ties.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from refertriage.app.core.metrics import precision_recall_f1

DEFAULT_GRID_STEP = 0.01


@dataclass(frozen=True, eq=False)
class ThresholdCurve:
    """Fold-averaged precision/recall/F1 per grid threshold."""

    grid: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    optimal_threshold: float

    @property
    def optimal_f1(self) -> float:
        return float(self.f1[int(np.flatnonzero(self.grid == self.optimal_threshold)[0])])

    def to_dict(self) -> dict:
        return {
            "optimal_threshold": self.optimal_threshold,
            "optimal_f1": self.optimal_f1,
            "grid_step": float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else None,
            "points": len(self.grid),
        }


def threshold_grid(step: float = DEFAULT_GRID_STEP) -> np.ndarray:
    """Grid 0..1 inclusive; i/n so points equal their decimal literals."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1 evenly, got {step}")
    return np.arange(n + 1) / n


def _fold_curves(y: np.ndarray, s: np.ndarray, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    points = np.array([precision_recall_f1(y, s, float(t)) for t in grid])
    return points[:, 0], points[:, 1], points[:, 2]


def threshold_sweep(
    folds: list[tuple[np.ndarray, np.ndarray]], step: float = DEFAULT_GRID_STEP
) -> ThresholdCurve:
    """
    Sweep the decision threshold over per-fold (labels, scores) pairs.

    Raises:
        ValueError: No folds, mismatched lengths, or scores outside [0, 1]
    """
    if not folds:
        raise ValueError("threshold_sweep needs at least one fold")
    grid = threshold_grid(step)

    curves = []
    for i, (labels, scores) in enumerate(folds):
        y = np.asarray(labels, dtype=np.int64)
        s = np.asarray(scores, dtype=np.float64)
        if y.shape != s.shape:
            raise ValueError(f"fold {i}: {len(y)} labels for {len(s)} scores")
        if s.size and (s.min() < 0.0 or s.max() > 1.0):
            raise ValueError(f"fold {i}: scores must lie in [0, 1]")
        curves.append(_fold_curves(y, s, grid))

    precision = np.mean([c[0] for c in curves], axis=0)
    recall = np.mean([c[1] for c in curves], axis=0)
    f1 = np.mean([c[2] for c in curves], axis=0)
    best = int(np.argmax(f1))

    return ThresholdCurve(
        grid=grid, precision=precision, recall=recall, f1=f1, optimal_threshold=float(grid[best])
    )


def write_threshold_curve_csv(curve: ThresholdCurve, path: str) -> None:
    """Four-column CSV: threshold, precision, recall, f1."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["threshold", "precision", "recall", "f1"])
        for row in zip(curve.grid, curve.precision, curve.recall, curve.f1):
            writer.writerow([repr(float(v)) for v in row])
