"""
Noise Tolerance Pipeline

Perturbs the corpus at each (noise kind, level), re-embeds it and
cross-validates the same classifier on the same fold plan, repeated over
several seeds. Level 0 is the unperturbed run and is shared by all kinds.
"""

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np
from tqdm import tqdm

from refertriage.app.core.bootstrap import BootstrapSpec, bootstrap_ci
from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.cross_validation import run_cv
from refertriage.app.core.dataset import ReferralDataset
from refertriage.app.core.embedding_matrix import EmbeddedDataset
from refertriage.app.core.folds import stratified_folds
from refertriage.app.core.perturb import DEFAULT_LEVELS, NOISE_KINDS, NoiseSpec, perturb_dataset
from refertriage.app.core.resample import ResampleSpec

logger = logging.getLogger(__name__)

NOISE_CSV_COLUMNS = ("kind", "level", "mean_roc_auc", "ci_lower", "ci_upper", "std")


@dataclass(frozen=True)
class NoisePoint:
    kind: str
    level: float
    mean_roc_auc: float
    ci_lower: float
    ci_upper: float
    std: float
    seed_means: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "mean_roc_auc": self.mean_roc_auc,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "std": self.std,
            "seed_means": list(self.seed_means),
        }


@dataclass(frozen=True)
class NoiseSweepResult:
    points: list[NoisePoint]
    seeds: tuple[int, ...]

    def point(self, kind: str, level: float) -> NoisePoint:
        for p in self.points:
            if p.kind == kind and p.level == level:
                return p
        raise KeyError(f"no sweep point for {kind} at level {level}")

    def to_dict(self) -> dict:
        return {"seeds": list(self.seeds), "points": [p.to_dict() for p in self.points]}


def noise_sweep(
    dataset: ReferralDataset,
    embed: Callable[[ReferralDataset], EmbeddedDataset],
    classifier: ClassifierSpec,
    resample: ResampleSpec,
    seeds: list[int],
    kinds: list[str] = NOISE_KINDS,
    levels: list[float] = DEFAULT_LEVELS,
    k_folds: int = 5,
    boot: BootstrapSpec | None = None,
    progress: bool = False,
    n_jobs: int = 1,
) -> NoiseSweepResult:
    """
    Mean ROC-AUC per noise kind and level.

    Args:
        dataset: Clean corpus
        embed: Embedding provider bound to its settings
        classifier: Classifier spec (its seed is replaced per repeat)
        resample: Training-split rebalancing (seed replaced per repeat)
        seeds: One repeat per seed; each seed drives the noise, the fold plan
            and the model
        kinds: Noise kinds to sweep
        levels: Noise levels (0 means the clean corpus)
        k_folds: Outer folds
        boot: Bootstrap settings for intervals over pooled fold values
        progress: Show a tqdm progress bar
        n_jobs: Worker threads across folds

    Returns:
        NoiseSweepResult with one point per (kind, level), kinds outermost

    Raises:
        ValueError: No seeds
    """
    if not seeds:
        raise ValueError("noise_sweep needs at least one seed")
    boot = boot or BootstrapSpec()
    labels = np.array(dataset.labels)
    plans = {s: stratified_folds(labels, k_folds, s) for s in seeds}

    def fold_aucs(corpus: ReferralDataset, seed: int) -> list[float]:
        report = run_cv(
            embed(corpus),
            classifier.with_seed(seed),
            replace(resample, seed=seed),
            plans[seed],
            boot,
            n_jobs=n_jobs,
        )
        return report.metric_values("roc_auc")

    clean = {}
    steps = [(kind, level) for kind in kinds for level in levels]
    points = []
    for kind, level in tqdm(steps, desc="noise sweep", disable=not progress):
        per_seed = []
        for seed in seeds:
            if level == 0.0:
                if seed not in clean:
                    clean[seed] = fold_aucs(dataset, seed)
                per_seed.append(clean[seed])
            else:
                noisy = perturb_dataset(dataset, NoiseSpec(kind=kind, level=level, seed=seed))
                per_seed.append(fold_aucs(noisy, seed))

        pooled = [v for values in per_seed for v in values]
        mean, lower, upper = bootstrap_ci(pooled, boot)
        points.append(
            NoisePoint(
                kind=kind,
                level=level,
                mean_roc_auc=mean,
                ci_lower=lower,
                ci_upper=upper,
                std=float(np.std(pooled, ddof=1)) if len(pooled) > 1 else 0.0,
                seed_means=tuple(float(np.mean(v)) for v in per_seed),
            )
        )
        logger.info("noise %s@%.2f: mean roc_auc %.4f", kind, level, mean)

    return NoiseSweepResult(points=points, seeds=tuple(seeds))


def write_noise_curve_csv(result: NoiseSweepResult, path: str) -> None:
    """One row per (kind, level) for plotting."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(NOISE_CSV_COLUMNS)
        for p in result.points:
            writer.writerow([p.kind, repr(p.level), repr(p.mean_roc_auc), repr(p.ci_lower), repr(p.ci_upper), repr(p.std)])
