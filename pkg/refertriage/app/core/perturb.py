"""
Controlled text noise for robustness experiments.

Four perturbation kinds at level rho in [0, 0.5]: character substitution,
character deletion, word swapping and word deletion. Exactly floor(rho * n)
units (characters or whitespace-delimited words) are perturbed.
"""

import math
import string
from dataclasses import dataclass

import numpy as np

from refertriage.app.core.dataset import ReferralDataset
from refertriage.app.core.seeding import record_seed

NOISE_KINDS = ("char_sub", "char_del", "word_swap", "word_del")
DEFAULT_LEVELS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
MAX_LEVEL = 0.5

_ALPHABET = string.ascii_lowercase


@dataclass(frozen=True)
class NoiseSpec:
    """Noise kind, level rho and seed."""

    kind: str
    level: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not (0.0 <= self.level <= MAX_LEVEL):
            raise ValueError(f"level must be in [0, {MAX_LEVEL}], got {self.level}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "level": self.level, "seed": self.seed}


def perturbation_count(level: float, n: int) -> int:
    """floor(level * n), tolerant of binary representation error."""
    return int(math.floor(level * n + 1e-9))


def _substitute(text: str, k: int, rng: np.random.Generator) -> str:
    chars = list(text)
    for pos in rng.choice(len(chars), size=k, replace=False):
        original = chars[pos]
        choices = [c for c in _ALPHABET if c != original]
        chars[pos] = choices[int(rng.integers(len(choices)))]
    return "".join(chars)


def _delete_chars(text: str, k: int, rng: np.random.Generator) -> str:
    drop = set(int(p) for p in rng.choice(len(text), size=k, replace=False))
    return "".join(c for i, c in enumerate(text) if i not in drop)


def _swap_words(words: list[str], k: int, rng: np.random.Generator) -> list[str]:
    words = list(words)
    for _ in range(k):
        i, j = rng.choice(len(words), size=2, replace=False)
        words[i], words[j] = words[j], words[i]
    return words


def _delete_words(words: list[str], k: int, rng: np.random.Generator) -> list[str]:
    drop = set(int(p) for p in rng.choice(len(words), size=k, replace=False))
    return [w for i, w in enumerate(words) if i not in drop]


def perturb_text(text: str, spec: NoiseSpec, rng: np.random.Generator | None = None) -> str:
    """
    Apply one noise kind to a text.

    Level 0 and empty text return the input unchanged. Word kinds rejoin
    the surviving words with single spaces.

    Args:
        text: Input text
        spec: Noise kind, level and seed
        rng: Generator to draw from (default: seeded from spec.seed)

    Returns:
        Perturbed text
    """
    if spec.level == 0 or not text:
        return text
    rng = rng if rng is not None else np.random.default_rng(spec.seed)

    if spec.kind in ("char_sub", "char_del"):
        k = perturbation_count(spec.level, len(text))
        if k == 0:
            return text
        if spec.kind == "char_sub":
            return _substitute(text, k, rng)
        return _delete_chars(text, k, rng)

    words = text.split()
    k = perturbation_count(spec.level, len(words))
    if k == 0:
        return text
    if spec.kind == "word_swap":
        # one word cannot be swapped with itself
        if len(words) < 2:
            return text
        return " ".join(_swap_words(words, k, rng))
    return " ".join(_delete_words(words, k, rng))


def perturb_dataset(dataset: ReferralDataset, spec: NoiseSpec) -> ReferralDataset:
    """
    Perturb every record text with a per-record seed.

    Each record draws from seed XOR stable_hash(record_id), so removing
    records never changes how the remaining ones are perturbed. Ids, codes,
    labels and the enriched flag are kept.
    """
    if spec.level == 0:
        return dataset
    texts = [
        perturb_text(
            r.diagnosis_text,
            spec,
            rng=np.random.default_rng(record_seed(spec.seed, r.record_id)),
        )
        for r in dataset
    ]
    return dataset.with_texts(texts)
