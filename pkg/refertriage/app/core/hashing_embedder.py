"""
Signed feature hashing over character n-grams.

Deterministic offline text embedder: every character n-gram is hashed
(BLAKE2b, independent of interpreter hash seeding) into one of `dim`
buckets with a +/-1 sign, and each row is L2-normalized. A single edited
character only touches the n-grams that overlap it, so vectors degrade
gradually under character noise.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from refertriage.app.core.embedding_matrix import EmbeddingMatrix


@dataclass(frozen=True)
class HashingEmbedderConfig:
    """Hashing embedder settings (default dim mirrors a 384-d sentence encoder)."""

    dim: int = 384
    ngram_min: int = 3
    ngram_max: int = 5
    lowercase: bool = True
    signed: bool = True

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise ValueError(
                f"need 1 <= ngram_min <= ngram_max, got {self.ngram_min}..{self.ngram_max}"
            )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "ngram_min": self.ngram_min,
            "ngram_max": self.ngram_max,
            "lowercase": self.lowercase,
            "signed": self.signed,
        }


def char_ngrams(text: str, config: HashingEmbedderConfig) -> list[str]:
    """
    Character n-grams of a text, grouped by n then position.

    Texts shorter than ngram_min yield the whole text as their only gram.
    """
    if config.lowercase:
        text = text.lower()
    if not text:
        return []
    if len(text) < config.ngram_min:
        return [text]
    grams = []
    for n in range(config.ngram_min, config.ngram_max + 1):
        grams.extend(text[i:i + n] for i in range(len(text) - n + 1))
    return grams


def _bucket(gram: str, dim: int) -> tuple[int, float]:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "little")
    sign = -1.0 if (h >> 63) & 1 else 1.0
    return h % dim, sign


def embed_hashing(
    texts: list[str], config: HashingEmbedderConfig | None = None, record_ids: list[str] | None = None
) -> EmbeddingMatrix:
    """
    Embed texts by signed character n-gram hashing.

    Args:
        texts: Ordered texts; row i of the result belongs to texts[i]
        config: Embedder settings
        record_ids: Row ids (default: "0", "1", ...)

    Returns:
        EmbeddingMatrix with unit-norm rows for non-empty texts and zero
        rows for empty texts
    """
    config = config or HashingEmbedderConfig()
    if record_ids is None:
        record_ids = [str(i) for i in range(len(texts))]

    vectors = np.zeros((len(texts), config.dim), dtype=np.float64)
    cache: dict[str, tuple[int, float]] = {}

    for row, text in enumerate(texts):
        unsigned = np.zeros(config.dim, dtype=np.float64)
        for gram in char_ngrams(text or "", config):
            hit = cache.get(gram)
            if hit is None:
                hit = _bucket(gram, config.dim)
                cache[gram] = hit
            bucket, sign = hit
            vectors[row, bucket] += sign if config.signed else 1.0
            unsigned[bucket] += 1.0

        norm = np.linalg.norm(vectors[row])
        if norm == 0 and unsigned.any():
            # signed collisions cancelled out; fall back to plain counts in the same buckets
            vectors[row] = unsigned
            norm = np.linalg.norm(unsigned)
        if norm > 0:
            vectors[row] /= norm

    return EmbeddingMatrix(record_ids=tuple(record_ids), vectors=vectors)
