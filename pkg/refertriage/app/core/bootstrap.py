"""
Percentile bootstrap confidence intervals over fold-level metric values.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BootstrapSpec:
    """Resample count, two-sided alpha (0.05 = 95% interval) and seed."""

    n_resamples: int = 1000
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_resamples < 1:
            raise ValueError(f"n_resamples must be >= 1, got {self.n_resamples}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")

    def to_dict(self) -> dict:
        return {"n_resamples": self.n_resamples, "alpha": self.alpha, "seed": self.seed}


def bootstrap_ci(values: list[float], boot: BootstrapSpec) -> tuple[float, float, float]:
    """
    Mean and percentile-bootstrap interval of a small sample.

    The K values are resampled with replacement n_resamples times; the
    interval is the empirical alpha/2 and 1 - alpha/2 percentiles of the
    resample means, widened to contain the sample mean if rounding puts it
    outside.

    Returns:
        (mean, lower, upper)

    Raises:
        ValueError: If values is empty
    """
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        raise ValueError("bootstrap_ci needs at least one value")

    mean = float(np.mean(data))
    rng = np.random.default_rng(boot.seed)
    picks = rng.integers(0, data.size, size=(boot.n_resamples, data.size))
    means = data[picks].mean(axis=1)
    lower, upper = np.percentile(means, [100 * boot.alpha / 2, 100 * (1 - boot.alpha / 2)])
    return mean, float(min(lower, mean)), float(max(upper, mean))
