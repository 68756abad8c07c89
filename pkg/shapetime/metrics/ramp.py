from __future__ import annotations

import math

import numpy as np

from shapetime.alignment import cost_matrix_batch, hard_dtw_batch
from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import SegmentedSeries, SeriesLike
from shapetime.metrics.changepoints import _univariate

EPSILON_FRACTION = 0.05
_MIN_EPSILON = 1e-12


def default_epsilon(x: np.ndarray) -> float:
    return max(EPSILON_FRACTION * float(np.ptp(x)), _MIN_EPSILON)


def _swinging_door(x: np.ndarray, epsilon: float) -> SegmentedSeries:
    n = x.size
    if n == 1:
        return SegmentedSeries(breakpoints=(1,), slopes=())

    breaks = [0]
    pivot = 0
    upper, lower = math.inf, -math.inf
    k = 1
    while k < n:
        dt = k - pivot
        new_upper = min(upper, (x[k] + epsilon - x[pivot]) / dt)
        new_lower = max(lower, (x[k] - epsilon - x[pivot]) / dt)
        if new_lower > new_upper and k - 1 > pivot:
            # door closed: archive the previous point and restart from it
            pivot = k - 1
            breaks.append(pivot)
            upper, lower = math.inf, -math.inf
            continue
        upper, lower = new_upper, new_lower
        k += 1
    breaks.append(n - 1)

    slopes = tuple(float((x[b] - x[a]) / (b - a)) for a, b in zip(breaks, breaks[1:]))
    return SegmentedSeries(breakpoints=tuple(b + 1 for b in breaks), slopes=slopes)


def swinging_door(series: SeriesLike, epsilon: float | None = None) -> SegmentedSeries:
    x = _univariate(series)
    if epsilon is None:
        epsilon = default_epsilon(x)
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    return _swinging_door(x, float(epsilon))


def align_to_reference(y_pred: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Re-time y_pred onto the time axis of y_true along the optimal DTW path."""
    _, paths = hard_dtw_batch(cost_matrix_batch(y_pred[None, :, None], y_true[None, :, None]))
    path = paths[0]
    cols = np.arange(1, y_true.size + 1, dtype=np.float64)
    # mean matched index, rounded half-up
    positions = np.floor((path @ cols) / path.sum(axis=1) + 0.5)
    grid, inverse = np.unique(positions, return_inverse=True)
    means = np.bincount(inverse, weights=y_pred) / np.bincount(inverse)
    return np.interp(cols, grid, means)


def ramp_score(y_pred: SeriesLike, y_true: SeriesLike, epsilon: float | None = None) -> float:
    pred = _univariate(y_pred)
    true = _univariate(y_true)
    if pred.size != true.size:
        raise DimensionError(f"ramp score needs equal lengths, got {pred.size} and {true.size}")
    if epsilon is None:
        epsilon = default_epsilon(true)
    aligned = align_to_reference(pred, true)
    true_slopes = swinging_door(true, epsilon).step_slopes()
    pred_slopes = swinging_door(aligned, epsilon).step_slopes()
    return float(np.sum(np.abs(true_slopes - pred_slopes)))
