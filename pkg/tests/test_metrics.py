from __future__ import annotations

import math

import numpy as np
import pytest

from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import ChangePointSet
from shapetime.domain.schemas import DilateConfig
from shapetime.metrics import (
    best_sample,
    compare_samples,
    crps_ensemble,
    cross_loss_matrix,
    detect_peaks,
    detect_step_changepoint,
    dtw_metric,
    f1,
    h_diversity,
    h_measures,
    h_quality,
    hausdorff,
    mean_sample,
    metric_fn,
    mse_metric,
    ramp_score,
    swinging_door,
    tdi_metric,
)
from shapetime.metrics.ramp import default_epsilon


def _cps(*indices: int, horizon: int = 20) -> ChangePointSet:
    return ChangePointSet(indices=indices, horizon=horizon)


def test_hausdorff_examples() -> None:
    assert hausdorff(_cps(5), _cps(7)) == 2.0
    assert hausdorff(_cps(3, 10), _cps(3, 10)) == 0.0
    assert hausdorff(_cps(3, 10), _cps(4, 9)) == 1.0
    assert hausdorff(_cps(horizon=12), _cps(4, horizon=12)) == 12.0


def test_hausdorff_is_a_metric(rng: np.random.Generator) -> None:
    def random_set() -> ChangePointSet:
        size = int(rng.integers(1, 5))
        return _cps(*sorted(int(i) for i in rng.choice(np.arange(1, 21), size=size, replace=False)))

    for _ in range(1000):
        a, b, c = random_set(), random_set(), random_set()
        assert hausdorff(a, b) == hausdorff(b, a)
        assert hausdorff(a, a) == 0.0
        assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c)
        if hausdorff(a, b) == 0.0:
            assert a.indices == b.indices


def test_change_point_sets_validate_their_indices() -> None:
    with pytest.raises(DimensionError):
        ChangePointSet(indices=(4, 2), horizon=10)
    with pytest.raises(DimensionError):
        ChangePointSet(indices=(11,), horizon=10)


def test_step_change_point_examples() -> None:
    assert detect_step_changepoint([0.0, 0.0, 0.0, 1.0, 1.0]).indices == (4,)
    assert detect_step_changepoint([1.0, 1.0, 0.0, 0.0]).indices == (3,)


def test_step_change_point_on_a_constant_series_is_degenerate() -> None:
    cps = detect_step_changepoint([2.0] * 8)
    assert cps.indices == (4,)
    assert cps.degenerate


def test_step_change_point_matches_exhaustive_search(rng: np.random.Generator) -> None:
    for _ in range(50):
        x = rng.standard_normal(12)
        errors = [
            np.sum((x[:k] - x[:k].mean()) ** 2) + np.sum((x[k:] - x[k:].mean()) ** 2) for k in range(1, 12)
        ]
        assert detect_step_changepoint(x).indices == (int(np.argmin(errors)) + 2,)


def test_change_point_detection_needs_univariate_series() -> None:
    with pytest.raises(DimensionError):
        detect_step_changepoint(np.zeros((5, 2)))


def test_peak_examples() -> None:
    assert len(detect_peaks(np.arange(10.0), threshold=0.0, min_distance=1)) == 0

    triangle = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0]
    assert detect_peaks(triangle, threshold=3.5).indices == (5,)
    assert len(detect_peaks(triangle, threshold=4.0)) == 0

    two = [0.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0]
    assert detect_peaks(two, threshold=1.0, min_distance=1).indices == (2, 5)
    assert detect_peaks(two, threshold=1.0, min_distance=5).indices == (5,)


def test_swinging_door_examples() -> None:
    line = 2.0 * np.arange(10.0) + 1.0
    seg = swinging_door(line, 0.01)
    assert seg.breakpoints == (1, 10)
    assert seg.slopes == pytest.approx((2.0,))

    step = swinging_door([0.0, 0.0, 1.0, 1.0], 0.01)
    assert step.breakpoints == (1, 2, 3, 4)
    assert step.slopes == pytest.approx((0.0, 1.0, 0.0))
    np.testing.assert_allclose(step.step_slopes(), [0.0, 1.0, 0.0])

    assert swinging_door([0.0, 0.0, 1.0, 1.0], 5.0).breakpoints == (1, 4)


def test_swinging_door_rejects_nonpositive_epsilon() -> None:
    with pytest.raises(ParameterError):
        swinging_door([0.0, 1.0], 0.0)


def test_ramp_score_examples(rng: np.random.Generator) -> None:
    for _ in range(10):
        y = rng.standard_normal(15)
        assert ramp_score(y, y) == 0.0

    target = [0.0, 0.0, 0.0, 2.5, 2.5, 2.5]
    assert ramp_score(np.zeros(6), target) == pytest.approx(2.5, abs=1e-12)


def test_ramp_score_segments_both_series_with_the_reference_tolerance(rng: np.random.Generator) -> None:
    target = np.cumsum(rng.standard_normal(15)) * 0.1
    pred = 10.0 * rng.standard_normal(15)
    assert default_epsilon(pred) > default_epsilon(target)
    assert ramp_score(pred, target) == ramp_score(pred, target, epsilon=default_epsilon(target))


def test_ramp_score_needs_equal_lengths() -> None:
    with pytest.raises(DimensionError):
        ramp_score(np.zeros(5), np.zeros(6))


def test_crps_examples(rng: np.random.Generator) -> None:
    y = rng.standard_normal((6, 1))
    assert crps_ensemble([y, y, y], y) == 0.0
    x = rng.standard_normal((6, 1))
    assert crps_ensemble([x], y) == pytest.approx(float(np.mean(np.abs(x - y))), abs=1e-14)
    assert crps_ensemble([y + 1.0, y - 1.0], y) == pytest.approx(0.5, abs=1e-12)


def test_crps_is_nonnegative_and_permutation_invariant(rng: np.random.Generator) -> None:
    for _ in range(20):
        samples = rng.standard_normal((5, 8, 1))
        y = rng.standard_normal((8, 1))
        value = crps_ensemble(samples, y)
        assert value >= 0.0
        assert crps_ensemble(samples[::-1], y) == pytest.approx(value, rel=1e-12)


def test_crps_rejects_shape_mismatch() -> None:
    with pytest.raises(DimensionError):
        crps_ensemble(np.zeros((2, 5, 1)), np.zeros((4, 1)))


def test_hard_metrics_on_the_hand_checked_pair() -> None:
    y_pred = np.array([[[0.0], [0.0], [1.0]]])
    y_true = np.array([[[0.0], [1.0], [1.0]]])
    assert dtw_metric(y_pred, y_true).tolist() == [0.0]
    assert tdi_metric(y_pred, y_true)[0] == pytest.approx(2.0 / 9.0)
    assert mse_metric(y_pred, y_true)[0] == pytest.approx(1.0 / 3.0)


def test_metric_fn_knows_every_loss_name() -> None:
    for name in ("mse", "dtw", "tdi", "dilate", "soft_dtw"):
        assert callable(metric_fn(name, DilateConfig()))
    with pytest.raises(ParameterError):
        metric_fn("ramp")


@pytest.mark.parametrize("name", ["dtw", "mse", "tdi"])
def test_h_measures_vanish_when_predictions_match_the_futures(name: str, rng: np.random.Generator) -> None:
    futures = rng.standard_normal((3, 6, 1))
    loss = metric_fn(name)
    assert h_quality(futures, futures, loss) == 0.0
    assert h_diversity(futures, futures, loss) == 0.0
    assert h_measures(cross_loss_matrix(futures, futures, loss)) == (0.0, 0.0, 0.0)


def test_h_measures_small_cases(rng: np.random.Generator) -> None:
    pred, future = rng.standard_normal((2, 6, 1))
    loss = metric_fn("dtw")
    expected = float(loss(pred[None], future[None])[0])
    assert h_quality([pred], [future], loss) == pytest.approx(expected)
    assert h_diversity([pred], [future], loss) == pytest.approx(expected)

    assert h_measures(np.array([[0.0, 4.0], [4.0, 0.0]])) == (0.0, 0.0, 0.0)
    hq, hd, score = h_measures(np.array([[1.0, 4.0], [3.0, 2.0]]))
    assert (hq, hd) == (1.5, 1.5)
    assert score == pytest.approx(1.5)
    assert f1(0.0, 0.0) == 0.0
    assert f1(1.0, 3.0) == pytest.approx(1.5)


def test_h_measures_are_bounded_by_the_mean_pairwise_loss(rng: np.random.Generator) -> None:
    loss = metric_fn("dtw")
    for _ in range(10):
        preds = rng.standard_normal((4, 5, 1))
        futures = rng.standard_normal((3, 5, 1))
        mean = float(cross_loss_matrix(preds, futures, loss).mean())
        assert h_quality(preds, futures, loss) <= mean + 1e-12
        assert h_diversity(preds, futures, loss) <= mean + 1e-12


def test_best_and_mean_sample(rng: np.random.Generator) -> None:
    y = rng.standard_normal((5, 1))
    samples = np.stack([y, y + 1.0, y - 2.0])
    assert best_sample(samples, y, mse_metric) == 0.0
    assert mean_sample(samples, y, mse_metric) == pytest.approx(5.0 / 3.0)


def test_compare_samples() -> None:
    a = np.array([1.0, 1.1, 0.9, 1.05, 0.95])
    res = compare_samples(a, a + 5.0)
    assert res.significant
    assert res.p_value < 1e-6

    small = compare_samples(np.array([1.0]), np.array([2.0, 3.0]))
    assert not small.significant
    assert math.isnan(small.p_value)
