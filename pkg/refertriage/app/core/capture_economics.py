"""
Capture-efficiency economics.

A fraction c of referrals is routed by the model and converts at the
model's procedure rate m; the rest convert at the baseline rate b, so the
effective rate is e = (1 - c) * b + c * m. Procedure counts round half away
from zero; revenue is the extra procedures over the baseline count times
the price per procedure.
"""

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from refertriage.app.core.metrics import DEFAULT_THRESHOLD, confusion
from refertriage.app.core.significance import two_proportion_test

DEFAULT_CAPTURE_LEVELS = (0.05, 0.10, 0.20, 0.40, 0.80)
DEFAULT_N_REFERRALS = 5000
DEFAULT_PRICE_PER_PROCEDURE = 5000.0
CAPTURE_CSV_COLUMNS = (
    "capture_pct",
    "effective_rate_pct",
    "pct_increase",
    "procedures",
    "revenue_increase_musd",
)


def round_count(value: float) -> int:
    """Round half away from zero; float noise below 1e-9 is ignored (563.4999999999999 -> 564)."""
    snapped = Decimal(repr(float(value))).quantize(Decimal("1e-9"), rounding=ROUND_HALF_UP)
    return int(snapped.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _check_rate(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class CaptureScenario:
    baseline_rate: float
    model_rate: float
    capture_levels: tuple[float, ...] = DEFAULT_CAPTURE_LEVELS
    n_referrals: int = DEFAULT_N_REFERRALS
    price_per_procedure: float = DEFAULT_PRICE_PER_PROCEDURE

    def __post_init__(self):
        _check_rate("baseline_rate", self.baseline_rate)
        _check_rate("model_rate", self.model_rate)
        object.__setattr__(self, "capture_levels", tuple(float(c) for c in self.capture_levels))
        for c in self.capture_levels:
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"capture level must lie in [0, 1], got {c}")
        if self.n_referrals < 1:
            raise ValueError(f"n_referrals must be >= 1, got {self.n_referrals}")
        if self.price_per_procedure < 0:
            raise ValueError(f"price_per_procedure must be >= 0, got {self.price_per_procedure}")

    def to_dict(self) -> dict:
        return {
            "baseline_rate": self.baseline_rate,
            "model_rate": self.model_rate,
            "capture_levels": list(self.capture_levels),
            "n_referrals": self.n_referrals,
            "price_per_procedure": self.price_per_procedure,
        }


class CaptureScenarioConfig(BaseModel):
    """JSON form of a capture scenario."""

    baseline_rate: float = Field(gt=0.0, lt=1.0)
    model_rate: float = Field(gt=0.0, lt=1.0)
    capture_levels: list[float] = Field(default_factory=lambda: list(DEFAULT_CAPTURE_LEVELS))
    n_referrals: int = Field(default=DEFAULT_N_REFERRALS, ge=1)
    price_per_procedure: float = Field(default=DEFAULT_PRICE_PER_PROCEDURE, ge=0.0)

    def to_scenario(self) -> CaptureScenario:
        return CaptureScenario(
            baseline_rate=self.baseline_rate,
            model_rate=self.model_rate,
            capture_levels=tuple(self.capture_levels),
            n_referrals=self.n_referrals,
            price_per_procedure=self.price_per_procedure,
        )


@dataclass(frozen=True)
class CaptureRow:
    capture: float
    effective_rate: float
    pct_increase: float
    procedures: int
    revenue_increase: float

    def to_dict(self) -> dict:
        return {
            "capture": self.capture,
            "effective_rate": self.effective_rate,
            "pct_increase": self.pct_increase,
            "procedures": self.procedures,
            "revenue_increase": self.revenue_increase,
        }


def effective_rate(b: float, m: float, c: float) -> float:
    """
    Procedure rate when a fraction c of referrals is model-routed.

    Raises:
        ValueError: Rates outside (0, 1) or c outside [0, 1]
    """
    _check_rate("baseline_rate", b)
    _check_rate("model_rate", m)
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"capture level must lie in [0, 1], got {c}")
    return (1.0 - c) * b + c * m


def pct_increase(b: float, e: float) -> float:
    return (e - b) / b * 100.0


def simulate_capture(scenario: CaptureScenario) -> list[CaptureRow]:
    """One row per capture level, full precision."""
    b, m, n = scenario.baseline_rate, scenario.model_rate, scenario.n_referrals
    baseline_procedures = round_count(n * b)
    rows = []
    for c in scenario.capture_levels:
        e = effective_rate(b, m, c)
        procedures = round_count(n * e)
        rows.append(
            CaptureRow(
                capture=c,
                effective_rate=e,
                pct_increase=pct_increase(b, e),
                procedures=procedures,
                revenue_increase=(procedures - baseline_procedures) * scenario.price_per_procedure,
            )
        )
    return rows


def compare_rates(scenario: CaptureScenario, n_baseline: int, n_model: int) -> float:
    """
    Two-proportion test of baseline vs model-routed procedure rates.

    Args:
        scenario: Supplies both rates
        n_baseline: Referrals behind the baseline rate
        n_model: Referrals behind the model rate

    Returns:
        Two-sided p-value
    """
    return two_proportion_test(
        round_count(n_baseline * scenario.baseline_rate),
        n_baseline,
        round_count(n_model * scenario.model_rate),
        n_model,
    )


def fit_model_rate(b: float, rows: list[tuple[float, float]]) -> float:
    """
    Least-squares model rate from observed (capture, effective rate) pairs.

    Raises:
        ValueError: No row with a nonzero capture level
    """
    c = np.array([r[0] for r in rows], dtype=np.float64)
    e = np.array([r[1] for r in rows], dtype=np.float64)
    denominator = float(np.sum(c * c))
    if denominator == 0.0:
        raise ValueError("fit_model_rate needs at least one nonzero capture level")
    return b + float(np.sum(c * (e - b))) / denominator


def rate_from_predictions(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> float:
    """
    Procedure rate among referrals the model flags (precision at threshold).

    Raises:
        ValueError: If nothing is flagged
    """
    counts = confusion(labels, scores, threshold)
    flagged = counts.tp + counts.fp
    if flagged == 0:
        raise ValueError(f"no referral scored at or above threshold {threshold}")
    return counts.tp / flagged


def _round_display(value: float, places: int) -> str:
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def write_capture_csv(rows: list[CaptureRow], path: str) -> None:
    """Capture table CSV; percentages and revenue rounded to 2 decimals here only."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CAPTURE_CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    _round_display(row.capture * 100.0, 2),
                    _round_display(row.effective_rate * 100.0, 2),
                    _round_display(row.pct_increase, 2),
                    row.procedures,
                    _round_display(row.revenue_increase / 1e6, 2),
                ]
            )
