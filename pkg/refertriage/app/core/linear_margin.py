"""
Linear large-margin classifier.

Hinge loss with an L2 penalty, trained by per-sample SGD with a decaying
step size eta_t = eta0 / (1 + eta0 * alpha * t). Scores are the logistic
link applied to the margin w.x + b.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from refertriage.app.core.seeding import derive_rng


@dataclass(frozen=True, eq=False)
class LinearMarginState:
    weights: np.ndarray
    bias: float

    def margin(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights + self.bias

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.margin(X))

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearMarginState":
        return cls(weights=np.array(data["weights"], dtype=np.float64), bias=float(data["bias"]))


def fit_linear_margin(X: np.ndarray, y: np.ndarray, params: dict, seed: int) -> LinearMarginState:
    """Fit the hinge-loss model; epoch e shuffles with stream (seed, e)."""
    signs = np.where(y == 1, 1.0, -1.0)
    alpha, eta0 = float(params["alpha"]), float(params["eta0"])
    w = np.zeros(X.shape[1])
    b = 0.0
    t = 0

    for epoch in range(params["epochs"]):
        for i in derive_rng(seed, epoch).permutation(X.shape[0]):
            eta = eta0 / (1.0 + eta0 * alpha * t)
            violated = signs[i] * (X[i] @ w + b) < 1.0
            w *= 1.0 - eta * alpha
            if violated:
                w += eta * signs[i] * X[i]
                b += eta * signs[i]
            t += 1

    return LinearMarginState(weights=w, bias=float(b))
