"""
Comparison Pipelines

Balancing strategies, classifier families and embedding sets compared on
one shared stratified fold plan, so per-fold metrics are paired and can be
tested with Wilcoxon signed-rank and Benjamini-Hochberg.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from tqdm import tqdm

from refertriage.app.core.bootstrap import BootstrapSpec
from refertriage.app.core.classifier_spec import KINDS, ClassifierSpec, default_spec
from refertriage.app.core.cross_validation import CvReport, run_cv
from refertriage.app.core.embedding_matrix import EmbeddedDataset
from refertriage.app.core.folds import stratified_folds
from refertriage.app.core.resample import STRATEGIES, ResampleSpec
from refertriage.app.core.significance import PairwiseComparison, StatsConfig, pairwise_wilcoxon

logger = logging.getLogger(__name__)

TESTED_METRICS = ("roc_auc", "mcc")


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    """Per-system CV reports, pairwise tests and (for embeddings) the selection."""

    axis: str
    reports: dict[str, CvReport]
    pairwise: list[PairwiseComparison]
    selected: str | None = None
    dims: dict[str, int] = field(default_factory=dict)

    def table(self) -> list[dict]:
        rows = []
        for name, report in self.reports.items():
            row = {"system": name}
            for metric, summary in report.summary.items():
                row[metric] = {
                    "mean": summary.mean,
                    "std": summary.std,
                    "ci_lower": summary.ci_lower,
                    "ci_upper": summary.ci_upper,
                }
            if name in self.dims:
                row["dim"] = self.dims[name]
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        result = {
            "axis": self.axis,
            "table": self.table(),
            "pairwise": [p.to_dict() for p in self.pairwise],
            "folds": {name: [f.to_dict() for f in r.folds] for name, r in self.reports.items()},
        }
        if self.selected is not None:
            result["selected"] = self.selected
        return result


def _pairwise(reports: dict[str, CvReport]) -> list[PairwiseComparison]:
    if len(reports) < 2:
        return []
    comparisons = []
    for metric in TESTED_METRICS:
        per_fold = {name: r.metric_values(metric) for name, r in reports.items()}
        comparisons.extend(pairwise_wilcoxon(per_fold, metric))
    return comparisons


def compare_balancing(
    embedded: EmbeddedDataset,
    classifier: ClassifierSpec,
    strategies: list[str] = STRATEGIES,
    k_neighbors: int = 5,
    target: float = 1.0,
    k_folds: int = 5,
    seed: int = 0,
    boot: BootstrapSpec | None = None,
    progress: bool = False,
    n_jobs: int = 1,
) -> ComparisonResult:
    """Cross-validate one classifier under each rebalancing strategy at one target ratio."""
    boot = boot or BootstrapSpec(seed=seed)
    plan = stratified_folds(embedded.y, k_folds, seed)
    reports = {}
    for strategy in tqdm(strategies, desc="balancing", disable=not progress):
        spec = ResampleSpec(strategy=strategy, k_neighbors=k_neighbors, target=target, seed=seed)
        reports[strategy] = run_cv(embedded, classifier, spec, plan, boot, n_jobs=n_jobs)
        logger.info("balancing %s: mean roc_auc %.4f", strategy, reports[strategy].summary["roc_auc"].mean)
    return ComparisonResult(axis="balancing", reports=reports, pairwise=_pairwise(reports))


def compare_models(
    embedded: EmbeddedDataset,
    resample: ResampleSpec,
    kinds: list[str] = KINDS,
    specs: dict[str, ClassifierSpec] | None = None,
    k_folds: int = 5,
    seed: int = 0,
    boot: BootstrapSpec | None = None,
    progress: bool = False,
    n_jobs: int = 1,
) -> ComparisonResult:
    """
    Cross-validate each classifier family under the same rebalancing.

    Args:
        specs: Optional per-kind overrides; other kinds use their defaults
    """
    boot = boot or BootstrapSpec(seed=seed)
    specs = specs or {}
    plan = stratified_folds(embedded.y, k_folds, seed)
    reports = {}
    for kind in tqdm(kinds, desc="models", disable=not progress):
        spec = specs.get(kind) or default_spec(kind, seed)
        reports[kind] = run_cv(embedded, spec, resample, plan, boot, n_jobs=n_jobs)
        logger.info("model %s: mean roc_auc %.4f", kind, reports[kind].summary["roc_auc"].mean)
    return ComparisonResult(axis="model", reports=reports, pairwise=_pairwise(reports))


def select_parsimonious(
    means: dict[str, float],
    dims: dict[str, int],
    pairwise: list[PairwiseComparison],
    alpha: float,
) -> str:
    """
    Smallest-dimension set statistically indistinguishable from the best.

    The best set has the highest mean ROC-AUC (first in input order on
    ties). A set qualifies when its ROC-AUC q-value against the best is
    >= alpha; the qualifying set with the smallest dimension wins, input
    order breaking ties.
    """
    names = list(means)
    best = max(names, key=lambda n: (means[n], -names.index(n)))
    q_vs_best = {}
    for p in pairwise:
        if p.metric != "roc_auc":
            continue
        if p.system_a == best:
            q_vs_best[p.system_b] = p.q_value
        elif p.system_b == best:
            q_vs_best[p.system_a] = p.q_value
    candidates = [n for n in names if n == best or q_vs_best.get(n, 0.0) >= alpha]
    return min(candidates, key=lambda n: (dims[n], names.index(n)))


def compare_embeddings(
    embedded_sets: dict[str, EmbeddedDataset],
    classifier: ClassifierSpec,
    resample: ResampleSpec,
    k_folds: int = 5,
    seed: int = 0,
    boot: BootstrapSpec | None = None,
    stats: StatsConfig | None = None,
    progress: bool = False,
    n_jobs: int = 1,
) -> ComparisonResult:
    """
    Compare embedding sets of the same corpus and pick the parsimonious one.

    Raises:
        ValueError: Fewer than two sets, or sets whose labels disagree
    """
    if len(embedded_sets) < 2:
        raise ValueError("compare_embeddings needs at least two embedding sets")
    boot = boot or BootstrapSpec(seed=seed)
    stats = stats or StatsConfig()
    names = list(embedded_sets)
    reference = embedded_sets[names[0]]
    for name in names[1:]:
        if not np.array_equal(embedded_sets[name].y, reference.y):
            raise ValueError(f"embedding set {name!r} is not aligned with {names[0]!r}")

    plan = stratified_folds(reference.y, k_folds, seed)
    reports = {}
    for name in tqdm(names, desc="embeddings", disable=not progress):
        reports[name] = run_cv(
            embedded_sets[name], classifier, replace(resample, seed=seed), plan, boot, n_jobs=n_jobs
        )
    pairwise = _pairwise(reports)
    dims = {name: embedded_sets[name].matrix.dim for name in names}
    selected = select_parsimonious(
        {name: r.summary["roc_auc"].mean for name, r in reports.items()}, dims, pairwise, stats.alpha
    )
    logger.info("embedding comparison selected %s (dim %d)", selected, dims[selected])
    return ComparisonResult(
        axis="embedding", reports=reports, pairwise=pairwise, selected=selected, dims=dims
    )
