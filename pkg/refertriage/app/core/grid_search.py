"""
Exhaustive hyperparameter search with internal stratified cross-validation.

Each configuration is scored by its mean ROC-AUC over K' inner folds of the
training data; the best mean wins and ties go to the earliest
configuration in grid order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from refertriage.app.core.classifier import predict_scores, train
from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.folds import stratified_folds
from refertriage.app.core.metrics import roc_auc
from refertriage.app.core.resample import ResampleSpec, rebalance
from refertriage.app.core.seeding import derive_seed

logger = logging.getLogger(__name__)

INNER_FOLDS = 3


def _score_config(
    X: np.ndarray,
    y: np.ndarray,
    spec: ClassifierSpec,
    plan,
    resample: ResampleSpec | None,
) -> float:
    aucs = []
    for fold in range(plan.K):
        train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
        X_train, y_train = X[train_idx], y[train_idx]
        if resample is not None:
            fold_resample = ResampleSpec(
                strategy=resample.strategy,
                k_neighbors=resample.k_neighbors,
                target=resample.target,
                seed=derive_seed(resample.seed, fold),
            )
            X_train, y_train = rebalance(X_train, y_train, fold_resample)
        model = train(X_train, y_train, spec)
        aucs.append(roc_auc(y[test_idx], predict_scores(model, X[test_idx])))
    return float(np.mean(aucs))


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    grid: list[ClassifierSpec],
    inner_folds: int = INNER_FOLDS,
    seed: int = 0,
    resample: ResampleSpec | None = None,
    n_jobs: int = 1,
) -> tuple[ClassifierSpec, list[float]]:
    """
    Evaluate every configuration and pick the best.

    Args:
        X: Training matrix
        y: Training labels
        grid: Configurations in evaluation order
        inner_folds: K' inner stratified folds
        seed: Inner fold-plan seed
        resample: Optional rebalancing of inner training splits only
        n_jobs: Worker threads across configurations

    Returns:
        (best spec, mean inner ROC-AUC per configuration in grid order)

    Raises:
        ValueError: Empty grid, or a class with fewer than inner_folds members
    """
    if not grid:
        raise ValueError("grid must contain at least one configuration")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    try:
        plan = stratified_folds(y, inner_folds, seed)
    except ValueError as e:
        raise ValueError(f"infeasible inner stratification: {e}") from e

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            scores = list(pool.map(lambda spec: _score_config(X, y, spec, plan, resample), grid))
    else:
        scores = [_score_config(X, y, spec, plan, resample) for spec in grid]

    best = int(np.argmax(scores))
    logger.info("grid search: best config #%d of %d (inner ROC-AUC %.4f)", best, len(grid), scores[best])
    return grid[best], scores
