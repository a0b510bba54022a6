"""
Class rebalancing for training splits.

SMOTE and ADASYN add synthetic minority points on segments between a real
minority point and one of its k nearest minority neighbors (Euclidean,
ties to the lower row index); random undersampling drops majority rows.
Oversamplers always keep every original row, synthetic rows are appended.
"""

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
from sklearn.neighbors import NearestNeighbors

logger = logging.getLogger(__name__)

STRATEGIES = ("smote", "adasyn", "undersample", "none")


@dataclass(frozen=True)
class ResampleSpec:
    """Rebalancing strategy; target is the minority:majority ratio afterwards."""

    strategy: str = "smote"
    k_neighbors: int = 5
    target: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not (0.0 < self.target <= 1.0):
            raise ValueError(f"target must be in (0, 1], got {self.target}")

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "k_neighbors": self.k_neighbors,
            "target": self.target,
            "seed": self.seed,
        }


def _round_half_up(value: float) -> int:
    return int(Decimal(repr(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def nearest_neighbors(points: np.ndarray, reference: np.ndarray, k: int, exclude_self: bool) -> np.ndarray:
    """
    Indices of the k nearest reference rows for each point row.

    Ties go to the lower reference index. With exclude_self, points and
    reference are the same matrix and a row is never its own neighbor.
    """
    n_ref = len(reference)
    if exclude_self:
        search = NearestNeighbors(n_neighbors=n_ref - 1, algorithm="brute").fit(reference)
        distances, indices = search.kneighbors()
    else:
        search = NearestNeighbors(n_neighbors=n_ref, algorithm="brute").fit(reference)
        distances, indices = search.kneighbors(points)
    order = np.lexsort((indices, distances), axis=-1)
    return np.take_along_axis(indices, order, axis=1)[:, :k]


def majority_fractions(X: np.ndarray, y: np.ndarray, minority: int, k_neighbors: int) -> np.ndarray:
    """
    ADASYN difficulty of each minority row, in row order.

    Share of majority rows among its k nearest neighbors in the whole set,
    itself excluded. k is capped at n - 1 only, never at the minority count.
    """
    min_idx = np.flatnonzero(y == minority)
    k = min(k_neighbors, len(y) - 1)
    full = nearest_neighbors(X[min_idx], X, k + 1, exclude_self=False)
    ratios = np.empty(len(min_idx))
    for i, row in enumerate(full):
        row = row[row != min_idx[i]][:k]
        ratios[i] = np.mean(y[row] != minority)
    return ratios


def allocate(weights: np.ndarray, total: int, rng: np.random.Generator) -> np.ndarray:
    """
    Split `total` synthetic points across points proportionally to weights.

    Floors of the proportional shares first, then the remainder goes to
    the largest fractional parts; equal fractions are ordered randomly.
    Equal weights always take the uniform path, so ADASYN with identical
    neighborhood ratios allocates exactly like SMOTE.
    """
    n = len(weights)
    if np.all(weights == weights[0]):
        raw = np.full(n, total / n)
    else:
        raw = weights * (total / weights.sum())
    counts = np.floor(raw).astype(np.int64)
    remainder = total - int(counts.sum())
    tiebreak = rng.permutation(n)
    order = np.lexsort((tiebreak, -(raw - counts)))
    counts[order[:remainder]] += 1
    return counts


def _interpolate(
    X_min: np.ndarray, counts: np.ndarray, neighbors: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    base = np.repeat(np.arange(len(X_min)), counts)
    choice = rng.integers(0, neighbors.shape[1], size=len(base))
    lam = rng.random(len(base))
    partner = neighbors[base, choice]
    return X_min[base] + lam[:, None] * (X_min[partner] - X_min[base])


def _classes(y: np.ndarray) -> tuple[int, int]:
    counts = np.bincount(y, minlength=2)
    minority = int(np.argmin(counts)) if counts[0] != counts[1] else 1
    return minority, 1 - minority


def rebalance(X: np.ndarray, y: np.ndarray, spec: ResampleSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    Rebalance a training split.

    Args:
        X: n x D matrix
        y: Binary labels
        spec: Strategy, neighbors, target ratio, seed

    Returns:
        (X_resampled, y_resampled); oversamplers return the original rows
        first, undersampling keeps retained rows in input order

    Raises:
        ValueError: Empty input, single-class input, or fewer than two
            minority points for smote/adasyn
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise ValueError("cannot rebalance an empty training set")
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} rows for {len(y)} labels")
    if len(np.unique(y)) < 2:
        raise ValueError("rebalancing needs both classes present")

    if spec.strategy == "none":
        return X.copy(), y.copy()

    rng = np.random.default_rng(spec.seed)
    minority, majority = _classes(y)
    min_idx = np.flatnonzero(y == minority)
    maj_idx = np.flatnonzero(y == majority)
    n_min, n_maj = len(min_idx), len(maj_idx)

    if spec.strategy == "undersample":
        n_keep = min(n_maj, max(1, _round_half_up(n_min / spec.target)))
        kept = np.sort(rng.choice(maj_idx, size=n_keep, replace=False))
        rows = np.sort(np.concatenate([min_idx, kept]))
        return X[rows].copy(), y[rows].copy()

    if n_min < 2:
        raise ValueError(f"{spec.strategy} needs at least 2 minority samples, got {n_min}")

    n_new = _round_half_up(spec.target * n_maj) - n_min
    if n_new <= 0:
        return X.copy(), y.copy()

    k = min(spec.k_neighbors, n_min - 1)
    X_min = X[min_idx]
    neighbors = nearest_neighbors(X_min, X_min, k, exclude_self=True)

    if spec.strategy == "smote":
        counts = allocate(np.ones(n_min), n_new, rng)
    else:
        ratios = majority_fractions(X, y, minority, spec.k_neighbors)
        if ratios.sum() == 0:
            logger.warning("adasyn: no majority neighbors around minority points; allocating uniformly")
            ratios = np.ones(n_min)
        counts = allocate(ratios, n_new, rng)

    synthetic = _interpolate(X_min, counts, neighbors, rng)
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(len(synthetic), minority, dtype=np.int64)])
    return X_out, y_out
