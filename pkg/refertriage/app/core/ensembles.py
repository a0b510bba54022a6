"""
Tree ensembles: random forest and gradient boosting.

Random forest: bootstrap-sampled Gini trees with floor(sqrt(D)) candidate
features per split; score = mean over trees of the leaf positive fraction.
Gradient boosting: stagewise regression trees fit to logistic-loss negative
gradients with Newton leaf steps; score = logistic(initial log-odds +
learning_rate * sum of stage outputs), accumulated in stage order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from refertriage.app.core.cart import DecisionTree, grow_tree
from refertriage.app.core.seeding import derive_rng


@dataclass(frozen=True, eq=False)
class RandomForestState:
    trees: tuple[DecisionTree, ...]

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, data: dict) -> "RandomForestState":
        return cls(trees=tuple(DecisionTree.from_dict(t) for t in data["trees"]))


def _fit_forest_tree(X: np.ndarray, y: np.ndarray, params: dict, seed: int, index: int) -> DecisionTree:
    rng = derive_rng(seed, index)
    n, d = X.shape
    if params["bootstrap"]:
        rows = rng.integers(0, n, size=n)
        Xb, yb = X[rows], y[rows]
    else:
        Xb, yb = X, y
    return grow_tree(
        Xb,
        yb,
        leaf_value=lambda idx: float(np.mean(yb[idx])),
        criterion="gini",
        max_depth=params["max_depth"],
        min_samples_split=params["min_samples_split"],
        min_samples_leaf=params["min_samples_leaf"],
        max_features=max(1, math.isqrt(d)),
        rng=rng,
    )


def fit_random_forest(
    X: np.ndarray, y: np.ndarray, params: dict, seed: int, n_jobs: int = 1
) -> RandomForestState:
    """
    Fit a random forest.

    Tree t draws from the stream (seed, t), so any n_jobs gives the same
    forest bit-for-bit.
    """
    indices = range(params["n_estimators"])
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(lambda t: _fit_forest_tree(X, y, params, seed, t), indices))
    else:
        trees = [_fit_forest_tree(X, y, params, seed, t) for t in indices]
    return RandomForestState(trees=tuple(trees))


@dataclass(frozen=True, eq=False)
class GradientBoostingState:
    init_log_odds: float
    learning_rate: float
    trees: tuple[DecisionTree, ...]

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        raw = np.full(X.shape[0], self.init_log_odds)
        for tree in self.trees:
            raw += self.learning_rate * tree.predict(X)
        return raw

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))

    def to_dict(self) -> dict:
        return {
            "init_log_odds": self.init_log_odds,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradientBoostingState":
        return cls(
            init_log_odds=float(data["init_log_odds"]),
            learning_rate=float(data["learning_rate"]),
            trees=tuple(DecisionTree.from_dict(t) for t in data["trees"]),
        )


def fit_gradient_boosting(X: np.ndarray, y: np.ndarray, params: dict) -> GradientBoostingState:
    """Fit stagewise logistic-loss boosting (deterministic: all features, no subsampling)."""
    y = y.astype(np.float64)
    prior = float(np.clip(np.mean(y), 1e-12, 1 - 1e-12))
    init = math.log(prior / (1.0 - prior))
    raw = np.full(X.shape[0], init)
    trees = []

    for _ in range(params["n_estimators"]):
        p = expit(raw)
        residual = y - p
        hessian = p * (1.0 - p)

        def newton_step(idx: np.ndarray, residual=residual, hessian=hessian) -> float:
            denominator = float(np.sum(hessian[idx]))
            if denominator < 1e-12:
                return 0.0
            return float(np.sum(residual[idx])) / denominator

        tree = grow_tree(
            X,
            residual,
            leaf_value=newton_step,
            criterion="squared_error",
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            min_samples_leaf=params["min_samples_leaf"],
        )
        trees.append(tree)
        raw += params["learning_rate"] * tree.predict(X)

    return GradientBoostingState(
        init_log_odds=init, learning_rate=float(params["learning_rate"]), trees=tuple(trees)
    )
