"""
Stratified K-fold partitions.

Within each class the indices are shuffled with a class-specific stream
of the seed and dealt round-robin to folds 0..K-1, so every fold's class
counts are within one of exact proportionality.
"""

from dataclasses import dataclass

import numpy as np

from refertriage.app.core.seeding import derive_rng


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Assignment of every record index to one of K folds."""

    K: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        assignments = np.asarray(self.assignments, dtype=np.int64)
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if assignments.size and (assignments.min() < 0 or assignments.max() >= self.K):
            raise ValueError("fold ids must lie in [0, K)")
        object.__setattr__(self, "assignments", assignments)

    def __len__(self) -> int:
        return len(self.assignments)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def to_dict(self) -> dict:
        return {"K": self.K, "seed": self.seed, "fold_sizes": np.bincount(self.assignments, minlength=self.K).tolist()}


def stratified_folds(y: np.ndarray, K: int, seed: int) -> FoldPlan:
    """
    Build a stratified fold plan.

    Args:
        y: Binary labels
        K: Number of folds (>= 2)
        seed: Shuffle seed

    Returns:
        FoldPlan

    Raises:
        ValueError: K < 2 or a class has fewer than K members
    """
    y = np.asarray(y, dtype=np.int64)
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    assignments = np.empty(len(y), dtype=np.int64)
    for label in (0, 1):
        members = np.flatnonzero(y == label)
        if len(members) < K:
            raise ValueError(
                f"class {label} has {len(members)} sample(s), fewer than K={K} folds"
            )
        shuffled = derive_rng(seed, label).permutation(members)
        assignments[shuffled] = np.arange(len(shuffled)) % K
    return FoldPlan(K=K, assignments=assignments, seed=seed)
