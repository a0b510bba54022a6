"""
Deterministic random streams.

Every randomized unit (tree, fold, record, synthetic point batch) draws from
its own generator derived from (master seed, unit index), so results do not
depend on execution order or worker count.
"""

import hashlib

import numpy as np

UINT64_MASK = (1 << 64) - 1


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """
    Build a generator for one unit of work.

    Args:
        seed: Master seed (any integer, reduced to 64 bits)
        *path: Unit indices, outermost first (e.g. fold, tree)

    Returns:
        Independent numpy Generator
    """
    entropy = [seed & UINT64_MASK, *(int(p) & UINT64_MASK for p in path)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child 64-bit seed from a master seed and unit indices."""
    entropy = [seed & UINT64_MASK, *(int(p) & UINT64_MASK for p in path)]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def stable_hash64(value: str) -> int:
    """Stable 64-bit hash of a string (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(value.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def record_seed(seed: int, record_id: str) -> int:
    """Per-record seed: master seed XOR stable hash of the record id."""
    return (seed & UINT64_MASK) ^ stable_hash64(record_id)
