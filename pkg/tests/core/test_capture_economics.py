"""
Unit tests for capture-efficiency economics.
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from refertriage.app.core.capture_economics import (
    CAPTURE_CSV_COLUMNS,
    CaptureScenario,
    CaptureScenarioConfig,
    compare_rates,
    effective_rate,
    fit_model_rate,
    pct_increase,
    rate_from_predictions,
    round_count,
    simulate_capture,
    write_capture_csv,
)

FIXTURES = Path(__file__).parent.parent / "fixtures"

BASELINE = 0.1127
# published (capture, effective rate) pairs for 5-40% capture
PUBLISHED_ROWS = [(0.05, 0.1333), (0.10, 0.1540), (0.20, 0.1953), (0.40, 0.2780)]
PUBLISHED_PCT = [18.27, 36.64, 73.34, 146.68]
PUBLISHED_PROCEDURES = [667, 770, 976, 1390]


def test_round_count_half_away_from_zero():
    """Test halves round up and float noise is ignored."""
    assert round_count(563.5) == 564
    assert round_count(5000 * 0.1127) == 564
    assert round_count(666.4999) == 666
    assert round_count(2.5) == 3


def test_effective_rate_single_level():
    """Test b = 11.27%, m = 52.57%, c = 5% gives 13.33%."""
    assert effective_rate(0.1127, 0.5257, 0.05) * 100 == pytest.approx(13.33, abs=0.006)


def test_effective_rate_is_affine_in_capture():
    """Test second differences over an even capture sweep vanish and the slope is m - b."""
    rng = np.random.default_rng(4)
    levels = np.linspace(0.0, 1.0, 21)
    for _ in range(50):
        b, m = sorted(rng.uniform(0.01, 0.99, size=2))

        rates = np.array([effective_rate(b, m, c) for c in levels])

        np.testing.assert_allclose(np.diff(rates, n=2), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.diff(rates) / np.diff(levels), m - b, atol=1e-9)
        assert np.all(np.diff(rates) >= 0)


def test_effective_rate_validation():
    """Test rates and capture level are range-checked."""
    with pytest.raises(ValueError):
        effective_rate(0.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        effective_rate(0.1, 0.5, 1.5)


def test_headline_increase():
    """Test full capture at 60.1% is a 433.3% increase."""
    e = effective_rate(BASELINE, 0.601, 1.0)

    assert pct_increase(BASELINE, e) == pytest.approx(433.3, abs=0.05)


def test_fit_model_rate_from_published_rows():
    """Test inverting the published rows gives m near 52.6%."""
    m = fit_model_rate(BASELINE, PUBLISHED_ROWS)

    assert 0.5255 <= m <= 0.5262


def test_fit_model_rate_needs_nonzero_capture():
    """Test rows at zero capture cannot identify m."""
    with pytest.raises(ValueError):
        fit_model_rate(BASELINE, [(0.0, 0.1127)])


def test_simulation_reproduces_published_rows():
    """Test rates, increases and counts with the fitted m."""
    m = fit_model_rate(BASELINE, PUBLISHED_ROWS)
    scenario = CaptureScenario(BASELINE, m, capture_levels=(0.05, 0.10, 0.20, 0.40))

    rows = simulate_capture(scenario)

    for row, (_, published_e), pct, procedures in zip(rows, PUBLISHED_ROWS, PUBLISHED_PCT, PUBLISHED_PROCEDURES):
        assert row.effective_rate * 100 == pytest.approx(published_e * 100, abs=0.05)
        assert row.pct_increase == pytest.approx(pct, abs=0.1)
        assert abs(row.procedures - procedures) <= 1
        assert row.revenue_increase == (row.procedures - 564) * 5000.0


def test_zero_capture_is_baseline():
    """Test c = 0 gives the baseline count and no revenue change."""
    rows = simulate_capture(CaptureScenario(BASELINE, 0.5259, capture_levels=(0.0,)))

    assert rows[0].procedures == 564
    assert rows[0].revenue_increase == 0.0
    assert rows[0].pct_increase == 0.0


def test_no_lift_when_model_rate_equals_baseline():
    """Test m = b leaves every level at zero revenue change."""
    rows = simulate_capture(CaptureScenario(BASELINE, BASELINE))

    assert all(row.revenue_increase == 0.0 for row in rows)


def test_compare_rates_significant():
    """Test the referral base rate against 60.1% is significant at 0.1%."""
    scenario = CaptureScenario(235 / 2086, 0.601)

    assert compare_rates(scenario, 2086, 2086) < 0.001


def test_rate_from_predictions():
    """Test the model rate is the precision among flagged referrals."""
    labels = np.array([1, 0, 1, 0])
    scores = np.array([0.9, 0.8, 0.3, 0.1])

    assert rate_from_predictions(labels, scores) == 0.5
    with pytest.raises(ValueError, match="no referral"):
        rate_from_predictions(labels, scores, threshold=0.95)


def test_scenario_config_from_json():
    """Test the JSON scenario validates and converts."""
    data = json.loads((FIXTURES / "capture_scenario.json").read_text(encoding="utf-8"))

    scenario = CaptureScenarioConfig.model_validate(data).to_scenario()

    assert scenario.capture_levels == (0.0, 0.05, 0.1, 0.2, 0.4)
    assert scenario.n_referrals == 5000
    with pytest.raises(ValidationError):
        CaptureScenarioConfig.model_validate({**data, "baseline_rate": 1.5})


def test_scenario_validation():
    """Test CaptureScenario range checks."""
    with pytest.raises(ValueError):
        CaptureScenario(BASELINE, 0.5, capture_levels=(1.2,))
    with pytest.raises(ValueError):
        CaptureScenario(BASELINE, 0.5, n_referrals=0)


def test_write_capture_csv(tmp_path):
    """Test the capture table CSV rounds for display only."""
    scenario = CaptureScenario(BASELINE, 0.5259, capture_levels=(0.0, 0.05))
    path = tmp_path / "capture_table.csv"

    write_capture_csv(simulate_capture(scenario), str(path))

    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == CAPTURE_CSV_COLUMNS
    assert rows[1] == ["0.00", "11.27", "0.00", "564", "0.00"]
    assert rows[2][0] == "5.00"
    assert rows[2][1] == "13.34"
    assert rows[2][3] == "667"
    assert rows[2][4] == "0.52"
