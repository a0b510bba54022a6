"""
Single-hidden-layer perceptron.

ReLU hidden layer, logistic output, mean binary cross-entropy plus an L2
penalty (alpha / 2) * (|W1|^2 + |w2|^2), trained by minibatch SGD for a
fixed number of epochs.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from refertriage.app.core.seeding import derive_rng


@dataclass(frozen=True, eq=False)
class MlpState:
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def logits(self, X: np.ndarray) -> np.ndarray:
        hidden = np.maximum(X @ self.W1 + self.b1, 0.0)
        return hidden @ self.w2 + self.b2

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.logits(X))

    def to_dict(self) -> dict:
        return {
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpState":
        return cls(
            W1=np.array(data["W1"], dtype=np.float64).reshape(len(data["W1"]), -1),
            b1=np.array(data["b1"], dtype=np.float64),
            w2=np.array(data["w2"], dtype=np.float64),
            b2=float(data["b2"]),
        )


def init_mlp(n_features: int, hidden_units: int, rng: np.random.Generator) -> MlpState:
    """Glorot-uniform weights, zero biases."""
    limit1 = np.sqrt(6.0 / (n_features + hidden_units))
    limit2 = np.sqrt(6.0 / (hidden_units + 1))
    return MlpState(
        W1=rng.uniform(-limit1, limit1, size=(n_features, hidden_units)),
        b1=np.zeros(hidden_units),
        w2=rng.uniform(-limit2, limit2, size=hidden_units),
        b2=0.0,
    )


def mlp_loss_and_gradients(
    state: MlpState, X: np.ndarray, y: np.ndarray, alpha: float
) -> tuple[float, MlpState]:
    """
    Loss and its analytic gradient (returned in MlpState shape).

    Cross-entropy is computed from logits as log(1 + e^z) - y z.
    """
    n = X.shape[0]
    pre = X @ state.W1 + state.b1
    hidden = np.maximum(pre, 0.0)
    z = hidden @ state.w2 + state.b2

    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += 0.5 * alpha * float(np.sum(state.W1 ** 2) + np.sum(state.w2 ** 2))

    dz = (expit(z) - y) / n
    d_hidden = np.outer(dz, state.w2) * (pre > 0)
    grad = MlpState(
        W1=X.T @ d_hidden + alpha * state.W1,
        b1=d_hidden.sum(axis=0),
        w2=hidden.T @ dz + alpha * state.w2,
        b2=float(dz.sum()),
    )
    return loss, grad


def fit_mlp(X: np.ndarray, y: np.ndarray, params: dict, seed: int) -> MlpState:
    """Fit by minibatch SGD; init uses stream (seed, 0), epoch e shuffles with (seed, 1, e)."""
    y = y.astype(np.float64)
    state = init_mlp(X.shape[1], params["hidden_units"], derive_rng(seed, 0))
    lr, alpha, batch = float(params["learning_rate"]), float(params["alpha"]), params["batch_size"]

    for epoch in range(params["epochs"]):
        order = derive_rng(seed, 1, epoch).permutation(X.shape[0])
        for start in range(0, len(order), batch):
            rows = order[start:start + batch]
            _, grad = mlp_loss_and_gradients(state, X[rows], y[rows], alpha)
            state = MlpState(
                W1=state.W1 - lr * grad.W1,
                b1=state.b1 - lr * grad.b1,
                w2=state.w2 - lr * grad.w2,
                b2=state.b2 - lr * grad.b2,
            )
    return state
