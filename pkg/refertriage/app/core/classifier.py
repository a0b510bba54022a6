"""
Classifier training, scoring and persistence.

Single entry point over the four model families. Trained classifiers are
immutable and can be scored concurrently. The model file is one JSON
document (format tag, version, spec, feature_dim, fitted state); Python's
shortest round-trip float text keeps scores bit-exact after reload.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.ensembles import (
    GradientBoostingState,
    RandomForestState,
    fit_gradient_boosting,
    fit_random_forest,
)
from refertriage.app.core.linear_margin import LinearMarginState, fit_linear_margin
from refertriage.app.core.mlp import MlpState, fit_mlp

MODEL_FORMAT = "refertriage-classifier"
MODEL_FORMAT_VERSION = 1

_STATE_TYPES = {
    "random_forest": RandomForestState,
    "gradient_boosting": GradientBoostingState,
    "linear_margin": LinearMarginState,
    "mlp": MlpState,
}


@dataclass(frozen=True, eq=False)
class TrainedClassifier:
    """Fitted model of one family; accepts only matrices of width feature_dim."""

    spec: ClassifierSpec
    feature_dim: int
    state: Any

    @property
    def kind(self) -> str:
        return self.spec.kind


def _validate_training_data(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] != len(y):
        raise ValueError(f"dimension mismatch: {X.shape[0]} rows for {len(y)} labels")
    if X.shape[0] < 2:
        raise ValueError("training needs at least 2 samples")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be binary (0/1)")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both classes present")
    return X, y


def train(X: np.ndarray, y: np.ndarray, spec: ClassifierSpec, n_jobs: int = 1) -> TrainedClassifier:
    """
    Train one classifier.

    Args:
        X: n x D training matrix
        y: Binary labels
        spec: Model family, hyperparameters, seed
        n_jobs: Worker threads for forest trees (results independent of it)

    Returns:
        TrainedClassifier

    Raises:
        ValueError: Single-class input, fewer than 2 rows, or X/y mismatch
    """
    X, y = _validate_training_data(X, y)
    params = spec.hyperparameters

    if spec.kind == "random_forest":
        state = fit_random_forest(X, y, params, spec.seed, n_jobs=n_jobs)
    elif spec.kind == "gradient_boosting":
        state = fit_gradient_boosting(X, y, params)
    elif spec.kind == "linear_margin":
        state = fit_linear_margin(X, y, params, spec.seed)
    else:
        state = fit_mlp(X, y, params, spec.seed)

    return TrainedClassifier(spec=spec, feature_dim=X.shape[1], state=state)


def predict_scores(model: TrainedClassifier, X: np.ndarray) -> np.ndarray:
    """
    Positive-class scores in [0, 1].

    Raises:
        ValueError: If X width differs from the training width
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ValueError(
            f"dimension mismatch: model expects width {model.feature_dim}, got shape {X.shape}"
        )
    return np.clip(model.state.predict_scores(X), 0.0, 1.0)


def save_classifier(model: TrainedClassifier, path: str) -> None:
    """Write the self-describing model file."""
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "feature_dim": model.feature_dim,
        "state": model.state.to_dict(),
    }
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(document, f, sort_keys=True)


def load_classifier(path: str) -> TrainedClassifier:
    """
    Read a model file written by save_classifier.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: Wrong format tag or unsupported version
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    with open(file_path, "r", encoding="utf-8") as f:
        document = json.load(f)

    if document.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} file: {path}")
    if document.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model file version {document.get('version')!r}")

    spec = ClassifierSpec.from_dict(document["spec"])
    state = _STATE_TYPES[spec.kind].from_dict(document["state"])
    return TrainedClassifier(spec=spec, feature_dim=int(document["feature_dim"]), state=state)
