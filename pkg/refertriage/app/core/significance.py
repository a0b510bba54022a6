"""
Significance tests used to compare systems evaluated on the same folds.

- Wilcoxon signed-rank, two-sided. Zero differences are dropped and tied
  absolute differences share average ranks. The null distribution is exact
  for up to EXACT_MAX_PAIRS nonzero pairs, normal with tie correction above.
- Benjamini-Hochberg step-up adjustment.
- Pooled two-proportion z-test.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_PAIRS = 25


@dataclass(frozen=True)
class StatsConfig:
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class PairedSample:
    """Per-fold metric values of two systems, paired by fold."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.a) != len(self.b):
            raise ValueError(f"paired samples differ in length: {len(self.a)} vs {len(self.b)}")
        if not self.a:
            raise ValueError("paired samples must be non-empty")

    def differences(self) -> np.ndarray:
        return np.asarray(self.a) - np.asarray(self.b)


@dataclass(frozen=True)
class PairwiseComparison:
    """One system-vs-system test result, q filled after BH adjustment."""

    system_a: str
    system_b: str
    metric: str
    p_value: float
    q_value: float
    n_nonzero: int
    test: str = "wilcoxon_signed_rank"

    def to_dict(self) -> dict:
        return {
            "system_a": self.system_a,
            "system_b": self.system_b,
            "metric": self.metric,
            "p_value": self.p_value,
            "q_value": self.q_value,
            "n_nonzero": self.n_nonzero,
            "test": self.test,
        }


def _nonzero_ranks(sample: PairedSample) -> tuple[np.ndarray, np.ndarray]:
    d = sample.differences()
    d = d[d != 0.0]
    if d.size == 0:
        raise ValueError("wilcoxon_signed_rank needs at least one nonzero difference")
    return d, rankdata(np.abs(d), method="average")


def _exact_upper_tail(doubled_ranks: np.ndarray, observed: int) -> tuple[float, float]:
    # count sign patterns per doubled W+ value; average ranks are multiples of 1/2
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        counts[r:] = counts[r:] + counts[: total + 1 - r].copy()
    patterns = 2.0 ** len(doubled_ranks)
    lower = counts[: observed + 1].sum() / patterns
    upper = counts[observed:].sum() / patterns
    return lower, upper


def wilcoxon_signed_rank(sample: PairedSample) -> float:
    """
    Two-sided Wilcoxon signed-rank p-value.

    Args:
        sample: Paired per-fold values

    Returns:
        p-value in (0, 1]

    Raises:
        ValueError: If every difference is zero
    """
    d, ranks = _nonzero_ranks(sample)
    m = len(d)
    w_plus = float(ranks[d > 0].sum())

    if m <= EXACT_MAX_PAIRS:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        lower, upper = _exact_upper_tail(doubled, int(round(2.0 * w_plus)))
        return float(min(1.0, 2.0 * min(lower, upper)))

    mean = m * (m + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    variance = m * (m + 1) * (2 * m + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
    z = (w_plus - mean) / math.sqrt(variance)
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


def benjamini_hochberg(p_values: list[float]) -> list[float]:
    """
    Step-up BH q-values in input order.

    Raises:
        ValueError: If any p lies outside [0, 1]
    """
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return []
    if np.any((p < 0.0) | (p > 1.0)) or np.any(np.isnan(p)):
        raise ValueError(f"p-values must lie in [0, 1], got {p_values}")

    m = len(p)
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    q_sorted = np.minimum.accumulate(scaled[::-1])[::-1]
    q = np.empty(m)
    q[order] = np.minimum(q_sorted, 1.0)
    return [float(v) for v in q]


def two_proportion_test(k1: int, n1: int, k2: int, n2: int) -> float:
    """
    Pooled two-proportion z-test, two-sided.

    Raises:
        ValueError: Counts outside 0 <= k <= n or n < 1
    """
    for k, n in ((k1, n1), (k2, n2)):
        if int(k) != k or int(n) != n:
            raise ValueError(f"counts must be integers, got {k}/{n}")
        if n < 1 or not 0 <= k <= n:
            raise ValueError(f"invalid counts {k}/{n}")

    p1, p2 = k1 / n1, k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    if se == 0.0:
        return 1.0
    z = (p1 - p2) / se
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


def pairwise_wilcoxon(
    per_fold: dict[str, list[float]], metric: str
) -> list[PairwiseComparison]:
    """
    All unordered system pairs, BH-adjusted together.

    Pairs whose fold values coincide exactly get p = 1.0 and test "identical".
    """
    names = list(per_fold)
    pairs = list(itertools.combinations(names, 2))
    raw = []
    for a, b in pairs:
        sample = PairedSample(per_fold[a], per_fold[b])
        nonzero = int(np.count_nonzero(sample.differences()))
        if nonzero == 0:
            raw.append((1.0, 0, "identical"))
        else:
            raw.append((wilcoxon_signed_rank(sample), nonzero, "wilcoxon_signed_rank"))

    q_values = benjamini_hochberg([r[0] for r in raw])
    return [
        PairwiseComparison(
            system_a=a, system_b=b, metric=metric, p_value=p, q_value=q, n_nonzero=nonzero, test=test
        )
        for (a, b), (p, nonzero, test), q in zip(pairs, raw, q_values)
    ]
