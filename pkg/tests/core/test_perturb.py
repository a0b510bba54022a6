"""
Unit tests for text perturbation.
"""

import numpy as np
import pytest

from refertriage.app.core.dataset import ReferralDataset, ReferralRecord
from refertriage.app.core.perturb import (
    NOISE_KINDS,
    NoiseSpec,
    perturb_dataset,
    perturb_text,
    perturbation_count,
)


def _corpus(n=20):
    return ReferralDataset(
        records=tuple(
            ReferralRecord(f"r{i}", f"left knee pain case number {i} chronic", (), i % 2) for i in range(n)
        )
    )


@pytest.mark.parametrize("kind", NOISE_KINDS)
def test_level_zero_is_identity(kind):
    """Test level 0 returns the input text for every kind."""
    text = "Right shoulder impingement, worse at night"

    assert perturb_text(text, NoiseSpec(kind=kind, level=0.0, seed=5)) == text


def test_char_del_count():
    """Test 'abcd' at 0.5 character deletion keeps 2 characters."""
    out = perturb_text("abcd", NoiseSpec(kind="char_del", level=0.5, seed=1))

    assert len(out) == 2
    assert all(c in "abcd" for c in out)


def test_word_del_count():
    """Test 'a b c d' at 0.5 word deletion keeps exactly 2 words."""
    out = perturb_text("a b c d", NoiseSpec(kind="word_del", level=0.5, seed=1))

    assert len(out.split()) == 2


def test_char_sub_changes_exact_count():
    """Test substitution changes floor(level * n) characters to a different letter."""
    text = "abcdefghij" * 3
    out = perturb_text(text, NoiseSpec(kind="char_sub", level=0.3, seed=7))

    assert len(out) == len(text)
    changed = [i for i, (a, b) in enumerate(zip(text, out)) if a != b]
    assert len(changed) == 9
    assert all(out[i].isalpha() and out[i].islower() for i in changed)


def test_word_swap_preserves_multiset():
    """Test word swapping only reorders words."""
    text = "one two three four five six"
    out = perturb_text(text, NoiseSpec(kind="word_swap", level=0.5, seed=3))

    assert sorted(out.split()) == sorted(text.split())


def test_word_swap_single_word_unchanged():
    """Test a one-word text cannot be swapped."""
    assert perturb_text("knee", NoiseSpec(kind="word_swap", level=0.5, seed=0)) == "knee"


def test_empty_text_unchanged():
    """Test the empty text is returned as is."""
    assert perturb_text("", NoiseSpec(kind="char_sub", level=0.5)) == ""


def test_perturbation_count_floor():
    """Test the floor rule tolerates binary representation error."""
    assert perturbation_count(0.3, 10) == 3
    assert perturbation_count(0.1, 9) == 0
    assert perturbation_count(0.5, 5) == 2


def test_noise_spec_rejects_level_above_half():
    """Test levels are limited to [0, 0.5]."""
    with pytest.raises(ValueError):
        NoiseSpec(kind="char_sub", level=0.6)
    with pytest.raises(ValueError):
        NoiseSpec(kind="typo", level=0.1)


def test_perturb_dataset_level_zero_returns_input():
    """Test level 0 leaves the dataset untouched."""
    corpus = _corpus()

    assert perturb_dataset(corpus, NoiseSpec(kind="char_sub", level=0.0)) is corpus


def test_perturb_dataset_deterministic():
    """Test the same spec perturbs identically twice."""
    spec = NoiseSpec(kind="char_sub", level=0.3, seed=11)

    assert perturb_dataset(_corpus(), spec).texts == perturb_dataset(_corpus(), spec).texts


def test_perturb_dataset_independent_of_other_records():
    """Test removing a record leaves the others' perturbations unchanged."""
    spec = NoiseSpec(kind="word_del", level=0.4, seed=2)
    full = perturb_dataset(_corpus(), spec)
    reduced = perturb_dataset(_corpus().subset([f"r{i}" for i in range(1, 20)]), spec)

    assert reduced.texts == full.texts[1:]


def test_perturb_dataset_keeps_ids_and_labels():
    """Test ids, labels and the enriched flag survive perturbation."""
    corpus = _corpus()
    noisy = perturb_dataset(corpus, NoiseSpec(kind="char_del", level=0.2, seed=4))

    assert noisy.record_ids == corpus.record_ids
    assert noisy.labels == corpus.labels
    assert noisy.enriched == corpus.enriched
    assert noisy.texts != corpus.texts


def test_explicit_rng_overrides_spec_seed():
    """Test a caller-supplied generator drives the draw."""
    spec = NoiseSpec(kind="char_sub", level=0.5, seed=0)
    a = perturb_text("abcdefgh", spec, rng=np.random.default_rng(99))
    b = perturb_text("abcdefgh", spec, rng=np.random.default_rng(99))

    assert a == b
