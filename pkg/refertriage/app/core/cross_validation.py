"""
Stratified cross-validation harness.

Per outer fold: optional grid search on the training split, rebalancing of
the training split only, training, scoring of the untouched test split and
metrics at the decision threshold. Fold metrics are summarized by mean,
sample standard deviation and a percentile bootstrap interval over the K
fold values.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from refertriage.app.core.bootstrap import BootstrapSpec, bootstrap_ci
from refertriage.app.core.classifier import predict_scores, train
from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.embedding_matrix import EmbeddedDataset
from refertriage.app.core.errors import FoldError
from refertriage.app.core.folds import FoldPlan
from refertriage.app.core.grid_search import INNER_FOLDS, grid_search
from refertriage.app.core.metrics import DEFAULT_THRESHOLD, METRIC_NAMES, MetricSet, binary_metrics
from refertriage.app.core.resample import ResampleSpec, rebalance
from refertriage.app.core.seeding import derive_seed

logger = logging.getLogger(__name__)

CV_REPORT_VERSION = 1


@dataclass(frozen=True, eq=False)
class FoldResult:
    """Outcome of one outer fold, with class-count instrumentation."""

    fold: int
    metrics: MetricSet
    test_indices: np.ndarray
    test_labels: np.ndarray
    scores: np.ndarray
    train_counts_raw: tuple[int, int]
    train_counts_resampled: tuple[int, int]
    test_counts: tuple[int, int]
    spec: ClassifierSpec
    grid_scores: list[float] | None = None

    def to_dict(self) -> dict:
        result = {
            "fold": self.fold,
            "metrics": self.metrics.to_dict(),
            "train_counts_raw": list(self.train_counts_raw),
            "train_counts_resampled": list(self.train_counts_resampled),
            "test_counts": list(self.test_counts),
            "classifier": self.spec.to_dict(),
        }
        if self.grid_scores is not None:
            result["grid_scores"] = list(self.grid_scores)
        return result


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    ci_lower: float
    ci_upper: float
    std: float


@dataclass(frozen=True, eq=False)
class CvReport:
    """Per-fold results plus mean/CI/SD per metric and the full setup echo."""

    folds: list[FoldResult]
    summary: dict[str, MetricSummary]
    classifier: ClassifierSpec | list[ClassifierSpec]
    resample: ResampleSpec
    boot: BootstrapSpec
    fold_plan: FoldPlan
    variant_tag: str
    threshold: float = DEFAULT_THRESHOLD
    extra: dict = field(default_factory=dict)

    @property
    def grid_searched(self) -> bool:
        return isinstance(self.classifier, list)

    def metric_values(self, metric: str) -> list[float]:
        """Per-fold values of one metric, fold order."""
        return [getattr(f.metrics, metric) for f in self.folds]

    def fold_predictions(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(test labels, test scores) per fold, for threshold sweeps."""
        return [(f.test_labels, f.scores) for f in self.folds]

    def out_of_fold_scores(self) -> np.ndarray:
        """Score of every record from the fold where it was held out."""
        n = len(self.fold_plan)
        scores = np.full(n, np.nan)
        for f in self.folds:
            scores[f.test_indices] = f.scores
        return scores

    def to_dict(self) -> dict:
        if self.grid_searched:
            classifier = {"grid": [spec.to_dict() for spec in self.classifier]}
        else:
            classifier = self.classifier.to_dict()
        return {
            "cv_report_version": CV_REPORT_VERSION,
            "variant": self.variant_tag,
            "selection": "grid_search" if self.grid_searched else "fixed",
            "classifier": classifier,
            "resample": self.resample.to_dict(),
            "bootstrap": self.boot.to_dict(),
            "fold_plan": self.fold_plan.to_dict(),
            "threshold": self.threshold,
            "means": {m: s.mean for m, s in self.summary.items()},
            "ci_lower": {m: s.ci_lower for m, s in self.summary.items()},
            "ci_upper": {m: s.ci_upper for m, s in self.summary.items()},
            "std": {m: s.std for m, s in self.summary.items()},
            "folds": [f.to_dict() for f in self.folds],
            **self.extra,
        }

    def write_json(self, path: str) -> None:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def _counts(y: np.ndarray) -> tuple[int, int]:
    c = np.bincount(y, minlength=2)
    return int(c[0]), int(c[1])


def _run_fold(
    fold: int,
    X: np.ndarray,
    y: np.ndarray,
    classifier: ClassifierSpec | list[ClassifierSpec],
    resample: ResampleSpec,
    plan: FoldPlan,
    threshold: float,
    inner_folds: int,
) -> FoldResult:
    train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
    X_train, y_train = X[train_idx], y[train_idx]
    fold_resample = ResampleSpec(
        strategy=resample.strategy,
        k_neighbors=resample.k_neighbors,
        target=resample.target,
        seed=derive_seed(resample.seed, fold),
    )

    grid_scores = None
    if isinstance(classifier, list):
        spec, grid_scores = grid_search(
            X_train,
            y_train,
            classifier,
            inner_folds=inner_folds,
            seed=derive_seed(plan.seed, fold),
            resample=fold_resample,
        )
        logger.info("fold %d: selected %s", fold, spec.hyperparameters)
    else:
        spec = classifier

    X_fit, y_fit = rebalance(X_train, y_train, fold_resample)
    model = train(X_fit, y_fit, spec.with_seed(derive_seed(spec.seed, fold)))
    scores = predict_scores(model, X[test_idx])
    metrics = binary_metrics(y[test_idx], scores, threshold)
    logger.info("fold %d: roc_auc=%.4f mcc=%.4f", fold, metrics.roc_auc, metrics.mcc)

    return FoldResult(
        fold=fold,
        metrics=metrics,
        test_indices=test_idx,
        test_labels=y[test_idx].copy(),
        scores=scores,
        train_counts_raw=_counts(y_train),
        train_counts_resampled=_counts(y_fit),
        test_counts=_counts(y[test_idx]),
        spec=spec,
        grid_scores=grid_scores,
    )


def summarize(folds: list[FoldResult], boot: BootstrapSpec) -> dict[str, MetricSummary]:
    """Mean, bootstrap CI and sample SD of every metric across folds."""
    summary = {}
    for name in METRIC_NAMES:
        values = [getattr(f.metrics, name) for f in folds]
        mean, lower, upper = bootstrap_ci(values, boot)
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        summary[name] = MetricSummary(mean=mean, ci_lower=lower, ci_upper=upper, std=std)
    return summary


def run_cv(
    embedded: EmbeddedDataset,
    classifier: ClassifierSpec | list[ClassifierSpec],
    resample: ResampleSpec,
    folds: FoldPlan,
    boot: BootstrapSpec,
    threshold: float = DEFAULT_THRESHOLD,
    inner_folds: int = INNER_FOLDS,
    n_jobs: int = 1,
) -> CvReport:
    """
    Cross-validate one classifier (or grid) on an embedded dataset.

    Args:
        embedded: Vectors and labels
        classifier: Fixed spec, or a list of specs for nested grid search
        resample: Rebalancing applied to training splits only
        folds: Outer fold plan covering the dataset
        boot: Bootstrap settings for the fold-level intervals
        threshold: Decision threshold for confusion-matrix metrics
        inner_folds: K' for nested grid search
        n_jobs: Worker threads across folds (results independent of it)

    Returns:
        CvReport with folds in order

    Raises:
        ValueError: Fold plan does not match the dataset
        FoldError: A component failed inside a fold (fold id attached)
    """
    if len(folds) != len(embedded):
        raise ValueError(f"fold plan covers {len(folds)} records, dataset has {len(embedded)}")
    X, y = embedded.X, embedded.y

    def run(fold: int) -> FoldResult:
        try:
            return _run_fold(fold, X, y, classifier, resample, folds, threshold, inner_folds)
        except Exception as e:
            raise FoldError(fold, e) from e

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, range(folds.K)))
    else:
        results = [run(k) for k in range(folds.K)]

    return CvReport(
        folds=results,
        summary=summarize(results, boot),
        classifier=classifier,
        resample=resample,
        boot=boot,
        fold_plan=folds,
        variant_tag=embedded.variant_tag,
        threshold=threshold,
    )
