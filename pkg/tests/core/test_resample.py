"""
Unit tests for class rebalancing (SMOTE, ADASYN, undersampling).
"""

import numpy as np
import pytest

from refertriage.app.core.resample import (
    ResampleSpec,
    allocate,
    majority_fractions,
    nearest_neighbors,
    rebalance,
)


def _imbalanced(n_major=90, n_minor=10, dim=2, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n_major, dim)), rng.normal(3, 1, (n_minor, dim))])
    y = np.array([0] * n_major + [1] * n_minor)
    return X, y


def _distance_to_segments(points, starts, ends):
    """Distance from each point to the closest of the given segments."""
    ab = ends - starts
    denom = np.maximum((ab * ab).sum(axis=1), 1e-300)
    rel = points[:, None, :] - starts[None, :, :]
    t = np.clip((rel * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    closest = starts[None, :, :] + t[:, :, None] * ab[None, :, :]
    return np.linalg.norm(points[:, None, :] - closest, axis=2).min(axis=1)


def test_two_point_minority_synthetic_on_segment():
    """Test one synthetic point between (0,0) and (1,1) lies on the diagonal."""
    X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 5.0], [5.0, 6.0]])
    y = np.array([1, 1, 0, 0, 0])

    X_out, y_out = rebalance(X, y, ResampleSpec(strategy="smote", k_neighbors=1, seed=3))

    assert len(y_out) == 6
    new = X_out[5]
    assert y_out[5] == 1
    assert new[0] == pytest.approx(new[1])
    assert 0.0 <= new[0] <= 1.0


def test_smote_balances_counts():
    """Test 90/10 with target 1.0 becomes 90/90."""
    X, y = _imbalanced()

    X_out, y_out = rebalance(X, y, ResampleSpec(strategy="smote", seed=1))

    assert np.bincount(y_out).tolist() == [90, 90]
    np.testing.assert_array_equal(X_out[:100], X)
    np.testing.assert_array_equal(y_out[:100], y)


def test_undersample_balances_from_input_rows():
    """Test undersampling keeps 10 of each class, all original rows."""
    X, y = _imbalanced()

    X_out, y_out = rebalance(X, y, ResampleSpec(strategy="undersample", seed=1))

    assert np.bincount(y_out).tolist() == [10, 10]
    original = {tuple(row) for row in X}
    assert all(tuple(row) in original for row in X_out)


def test_none_returns_copies():
    """Test strategy none returns the data unchanged."""
    X, y = _imbalanced()

    X_out, y_out = rebalance(X, y, ResampleSpec(strategy="none"))

    np.testing.assert_array_equal(X_out, X)
    assert X_out is not X


def test_partial_target_ratio():
    """Test target 0.5 makes the minority half the majority."""
    X, y = _imbalanced()

    _, y_out = rebalance(X, y, ResampleSpec(strategy="smote", target=0.5, seed=2))

    assert np.bincount(y_out).tolist() == [90, 45]


def test_oversampling_needs_two_minority_points():
    """Test SMOTE with a single minority sample is an error."""
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([0, 0, 1])

    with pytest.raises(ValueError, match="at least 2 minority"):
        rebalance(X, y, ResampleSpec(strategy="smote"))


def test_single_class_rejected():
    """Test single-class input is rejected."""
    with pytest.raises(ValueError):
        rebalance(np.zeros((3, 2)), np.zeros(3, dtype=int), ResampleSpec())


@pytest.mark.parametrize("strategy", ["smote", "adasyn"])
def test_synthetic_points_on_minority_segments(strategy):
    """Test every synthetic point lies on a segment to one of its k minority neighbors."""
    rng = np.random.default_rng(123)
    for trial in range(200):
        n = int(rng.integers(20, 201))
        dim = int(rng.integers(1, 9))
        n_minor = int(rng.integers(2, max(3, n // 3)))
        X = rng.normal(size=(n, dim))
        y = np.zeros(n, dtype=np.int64)
        y[rng.choice(n, size=n_minor, replace=False)] = 1
        k = int(rng.integers(1, 6))
        spec = ResampleSpec(strategy=strategy, k_neighbors=k, seed=trial)

        X_out, y_out = rebalance(X, y, spec)

        counts = np.bincount(y_out, minlength=2)
        assert abs(int(counts[1]) - int(counts[0])) <= 1
        X_min = X[y == 1]
        neighbors = nearest_neighbors(X_min, X_min, min(k, n_minor - 1), exclude_self=True)
        pairs = [(i, j) for i in range(len(X_min)) for j in neighbors[i]]
        starts = X_min[[i for i, _ in pairs]]
        ends = X_min[[j for _, j in pairs]]
        assert _distance_to_segments(X_out[n:], starts, ends).max() < 1e-9


def test_adasyn_equals_smote_when_ratios_all_zero():
    """Test well-separated clusters make ADASYN fall back to SMOTE's allocation."""
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(0, 0.1, (40, 2)), rng.normal(100, 0.1, (8, 2))])
    y = np.array([0] * 40 + [1] * 8)

    smote = rebalance(X, y, ResampleSpec(strategy="smote", k_neighbors=3, seed=9))
    adasyn = rebalance(X, y, ResampleSpec(strategy="adasyn", k_neighbors=3, seed=9))

    np.testing.assert_array_equal(smote[0], adasyn[0])
    np.testing.assert_array_equal(smote[1], adasyn[1])


def test_allocate_proportional_to_weights():
    """Test allocation follows the weights when they differ."""
    counts = allocate(np.array([0.0, 0.0, 1.0, 3.0]), 8, np.random.default_rng(0))

    assert counts.tolist() == [0, 0, 2, 6]


def test_adasyn_favours_points_near_majority():
    """Test the minority point surrounded by majority rows receives the synthetic points."""
    X = np.array(
        [[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0], [5.1, 5.0],
         [5.0, 5.1], [5.1, 5.1], [4.9, 5.0], [5.05, 5.05], [20.0, 20.0]]
    )
    y = np.array([1, 1, 1, 0, 0, 0, 0, 0, 1, 0])

    X_out, y_out = rebalance(X, y, ResampleSpec(strategy="adasyn", k_neighbors=2, seed=0))

    assert np.bincount(y_out).tolist() == [6, 6]
    # only the minority point at (5.05, 5.05) has majority neighbors
    for point in X_out[10:]:
        assert np.linalg.norm(point - X[8]) <= np.linalg.norm(X[8] - X[0]) + 1e-9


def test_allocate_sums_to_total():
    """Test allocation always distributes exactly the requested total."""
    rng = np.random.default_rng(0)
    for _ in range(50):
        weights = rng.random(int(rng.integers(1, 20)))
        total = int(rng.integers(0, 100))
        assert allocate(weights, total, rng).sum() == total


def test_rebalance_deterministic():
    """Test the same seed reproduces identical output."""
    X, y = _imbalanced()
    spec = ResampleSpec(strategy="adasyn", seed=4)

    a, b = rebalance(X, y, spec), rebalance(X, y, spec)

    np.testing.assert_array_equal(a[0], b[0])


def test_nearest_neighbors_ties_go_to_lower_index():
    """Test equidistant reference rows are returned in index order."""
    reference = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])

    found = nearest_neighbors(np.zeros((1, 2)), reference, 4, exclude_self=False)

    assert found.tolist() == [[0, 1, 2, 3]]


def test_nearest_neighbors_excludes_self():
    """Test a row never lists itself and ties still favour the lower index."""
    X = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])

    found = nearest_neighbors(X, X, 2, exclude_self=True)

    assert found.tolist() == [[1, 2], [0, 2], [0, 1]]


def test_adasyn_density_uses_full_k_with_few_minority_points():
    """Test three minority points with k=5 see five neighbors each, not two."""
    X = np.array(
        [[0.0, 0.0], [0.1, 0.0], [10.0, 10.0],
         [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 0.0], [0.0, -1.0],
         [10.0, 11.0], [11.0, 10.0], [9.0, 10.0], [10.0, 9.0]]
    )
    y = np.array([1, 1, 1] + [0] * 9)

    ratios = majority_fractions(X, y, minority=1, k_neighbors=5)

    np.testing.assert_allclose(ratios, [0.8, 0.8, 1.0])
    # two neighbors would give 0.5 for the close pair
    np.testing.assert_allclose(majority_fractions(X, y, minority=1, k_neighbors=2), [0.5, 0.5, 1.0])
