"""
CART tree induction.

Binary trees grown greedily: classification trees split on Gini impurity
decrease, regression trees (used by gradient boosting) on squared-error
decrease. Candidate thresholds are midpoints of consecutive distinct sorted
values; a sample goes left when its value is <= threshold. Among equally
good splits the lowest feature index wins, then the lowest threshold.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

LEAF = -1
CRITERIA = ("gini", "squared_error")


@dataclass(frozen=True)
class Split:
    """Best split of a node."""

    feature: int
    threshold: float
    gain: float


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """
    Fitted tree as flat node arrays (pre-order node ids, root = 0).

    feature[i] == LEAF marks a leaf; value[i] is the node's prediction
    (positive-class fraction for classification trees, Newton step or mean
    for regression trees).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def node_count(self) -> int:
        return int(len(self.feature))

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf id reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        return cls(
            feature=np.array(data["feature"], dtype=np.int64),
            threshold=np.array(data["threshold"], dtype=np.float64),
            left=np.array(data["left"], dtype=np.int64),
            right=np.array(data["right"], dtype=np.int64),
            value=np.array(data["value"], dtype=np.float64),
            n_samples=np.array(data["n_samples"], dtype=np.int64),
        )


def find_best_split(
    X: np.ndarray,
    target: np.ndarray,
    features: np.ndarray,
    min_samples_leaf: int = 1,
    criterion: str = "gini",
) -> Split | None:
    """
    Best split of one node over the given candidate features.

    Args:
        X: Node rows (n x D)
        target: Binary labels (gini) or real targets (squared_error)
        features: Candidate feature indices
        min_samples_leaf: Minimum rows on each side
        criterion: "gini" or "squared_error"

    Returns:
        Split maximizing impurity decrease, or None when no threshold
        satisfies min_samples_leaf
    """
    n = len(target)
    features = np.sort(np.asarray(features, dtype=np.int64))
    if n < 2 or features.size == 0:
        return None

    sub = X[:, features]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ts = np.asarray(target, dtype=np.float64)[order]

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    left_sum = np.cumsum(ts, axis=0)[:-1]
    total = float(np.sum(target))
    right_sum = total - left_sum

    if criterion == "gini":
        parent = 2.0 * total * (n - total) / (n * n)
        child = (
            2.0 * left_sum * (n_left - left_sum) / n_left
            + 2.0 * right_sum * (n_right - right_sum) / n_right
        ) / n
        gain = parent - child
    elif criterion == "squared_error":
        gain = (left_sum ** 2 / n_left + right_sum ** 2 / n_right - total ** 2 / n) / n
    else:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")

    valid = (xs[:-1] < xs[1:]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    gain = np.where(valid, gain, -np.inf)

    # feature-major scan: first maximum = lowest feature, then lowest threshold
    flat = gain.T.ravel()
    best = int(np.argmax(flat))
    if not np.isfinite(flat[best]):
        return None
    column, position = divmod(best, n - 1)
    low, high = xs[position, column], xs[position + 1, column]
    threshold = (low + high) / 2.0
    if threshold >= high:
        threshold = low
    return Split(feature=int(features[column]), threshold=float(threshold), gain=float(flat[best]))


def grow_tree(
    X: np.ndarray,
    target: np.ndarray,
    leaf_value: Callable[[np.ndarray], float],
    criterion: str = "gini",
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """
    Grow one tree depth-first.

    A node becomes a leaf at max_depth, below min_samples_split rows, when
    its targets are constant, or when no valid split exists. With
    max_features, candidate features are visited in a random order and
    constant features are skipped until max_features usable ones are found.

    Args:
        X: Training rows
        target: Labels (gini) or regression targets (squared_error)
        leaf_value: Maps node row indices to the node's prediction
        criterion: "gini" or "squared_error"
        max_depth: Depth limit (None = unbounded)
        min_samples_split: Minimum rows to attempt a split
        min_samples_leaf: Minimum rows per child
        max_features: Candidate features per split (None = all)
        rng: Generator for feature sampling

    Returns:
        DecisionTree
    """
    X = np.asarray(X, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    n_features = X.shape[1]
    if max_features is not None and max_features < n_features and rng is None:
        raise ValueError("feature subsampling requires an rng")

    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []

    def new_node(idx: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(leaf_value(idx)))
        n_samples.append(len(idx))
        return len(feature) - 1

    def candidate_features(Xn: np.ndarray) -> np.ndarray:
        usable = Xn.max(axis=0) > Xn.min(axis=0)
        if max_features is None or max_features >= n_features:
            return np.flatnonzero(usable)
        visit = rng.permutation(n_features)
        return visit[usable[visit]][:max_features]

    # explicit stack (left child pushed last) keeps pre-order ids without recursion
    stack = [(np.arange(X.shape[0]), 0, LEAF, True)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = new_node(idx)
        if parent != LEAF:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node

        t = target[idx]
        if (
            (max_depth is not None and depth >= max_depth)
            or len(idx) < min_samples_split
            or len(idx) < 2 * min_samples_leaf
            or np.all(t == t[0])
        ):
            continue

        Xn = X[idx]
        split = find_best_split(Xn, t, candidate_features(Xn), min_samples_leaf, criterion)
        if split is None:
            continue

        goes_left = Xn[:, split.feature] <= split.threshold
        feature[node] = split.feature
        threshold[node] = split.threshold
        stack.append((idx[~goes_left], depth + 1, node, False))
        stack.append((idx[goes_left], depth + 1, node, True))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int64),
    )
