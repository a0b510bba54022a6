"""
Integration tests on the planted-signal corpus.

Runs the whole chain (corpus -> hashing embeddings -> SMOTE -> forest under
stratified CV) on data where the answer is known: positives carry signal
tokens negatives never contain, so a correct pipeline separates them and a
leaky or broken one shows up as chance-level or inflated scores.
"""

from dataclasses import replace

import numpy as np
import pytest

from refertriage.app.core.bootstrap import BootstrapSpec
from refertriage.app.core.classifier_spec import ClassifierSpec
from refertriage.app.core.cross_validation import run_cv
from refertriage.app.core.embedding_providers import embed_dataset
from refertriage.app.core.folds import stratified_folds
from refertriage.app.core.hashing_embedder import HashingEmbedderConfig
from refertriage.app.core.resample import ResampleSpec

# fewer trees than the default forest keeps the full corpus under a minute
FOREST = ClassifierSpec("random_forest", {"n_estimators": 50}, seed=0)
SMOTE = ResampleSpec(strategy="smote", seed=0)
BOOT = BootstrapSpec(n_resamples=200, seed=0)


@pytest.fixture(scope="module")
def full_corpus():
    from scripts.generate_referral_fixture import generate_referral_corpus

    return generate_referral_corpus(seed=0)


@pytest.fixture(scope="module")
def embedded_corpus(full_corpus):
    return embed_dataset(full_corpus, hashing=HashingEmbedderConfig(dim=384))


def test_planted_signal_is_recovered(embedded_corpus):
    """Test the default chain separates the planted classes."""
    plan = stratified_folds(embedded_corpus.y, K=5, seed=0)

    report = run_cv(embedded_corpus, FOREST, SMOTE, plan, BOOT)

    assert len(embedded_corpus) == 2086
    assert int(embedded_corpus.y.sum()) == 235
    assert report.summary["roc_auc"].mean >= 0.95
    assert report.summary["mcc"].mean >= 0.5


def test_permuted_labels_score_at_chance(full_corpus, embedded_corpus):
    """Test shuffled labels give ROC-AUC near 0.5."""
    rng = np.random.default_rng(11)
    shuffled = rng.permutation(np.array(full_corpus.labels))
    permuted = embed_dataset(full_corpus.with_labels(shuffled.tolist()), hashing=HashingEmbedderConfig(dim=384))
    plan = stratified_folds(permuted.y, K=5, seed=0)

    report = run_cv(permuted, FOREST, SMOTE, plan, BOOT)

    assert 0.45 <= report.summary["roc_auc"].mean <= 0.55


def test_character_noise_degrades_ranking():
    """Test heavy substitution noise lowers ROC-AUC and level 0 equals the clean run exactly."""
    from pipelines.noise_sweep import noise_sweep
    from scripts.generate_referral_fixture import generate_referral_corpus

    corpus = generate_referral_corpus(n_total=600, n_positive=68, seed=1)
    hashing = HashingEmbedderConfig(dim=128)
    forest = ClassifierSpec("random_forest", {"n_estimators": 25})
    seeds = [0, 1, 2, 3, 4]

    result = noise_sweep(
        corpus,
        lambda dataset: embed_dataset(dataset, hashing=hashing),
        forest,
        SMOTE,
        seeds=seeds,
        kinds=["char_sub"],
        levels=[0.0, 0.5],
        k_folds=5,
        boot=BOOT,
    )

    clean, noisy = result.point("char_sub", 0.0), result.point("char_sub", 0.5)
    assert np.mean(clean.seed_means) - np.mean(noisy.seed_means) >= 0.05

    embedded = embed_dataset(corpus, hashing=hashing)
    for seed, seed_mean in zip(seeds, clean.seed_means):
        report = run_cv(
            embedded,
            forest.with_seed(seed),
            replace(SMOTE, seed=seed),
            stratified_folds(embedded.y, 5, seed),
            BOOT,
        )
        assert float(np.mean(report.metric_values("roc_auc"))) == seed_mean
