from __future__ import annotations

import logging

import numpy as np
from scipy.signal import find_peaks

from shapetime.core.errors import DimensionError
from shapetime.domain.entities import ChangePointSet, SeriesLike, as_values

logger = logging.getLogger(__name__)


def _univariate(series: SeriesLike) -> np.ndarray:
    values = as_values(series)
    if values.shape[1] != 1:
        raise DimensionError(f"expected a univariate series, got d={values.shape[1]}")
    return values[:, 0]


def detect_step_changepoint(series: SeriesLike) -> ChangePointSet:
    """Best two-segment piecewise-constant fit; the index is the first point of the second segment (1-based)."""
    x = _univariate(series)
    tau = x.size
    if tau < 2 or np.ptp(x) == 0.0:
        idx = max(tau // 2, 1)
        logger.debug("changepoint_degenerate", extra={"horizon": tau, "index": idx})
        return ChangePointSet(indices=(idx,), horizon=tau, degenerate=True)

    c1 = np.concatenate(([0.0], np.cumsum(x)))
    c2 = np.concatenate(([0.0], np.cumsum(x * x)))
    k = np.arange(1, tau)  # size of the first segment
    left = c2[k] - c1[k] ** 2 / k
    right = (c2[tau] - c2[k]) - (c1[tau] - c1[k]) ** 2 / (tau - k)
    best = int(np.argmin(left + right))
    return ChangePointSet(indices=(int(k[best]) + 1,), horizon=tau)


def detect_peaks(series: SeriesLike, threshold: float, min_distance: int = 1) -> ChangePointSet:
    """Local maxima above threshold; within min_distance only the higher peak survives."""
    x = _univariate(series)
    peaks, _ = find_peaks(x, height=np.nextafter(threshold, np.inf), distance=max(int(min_distance), 1))
    return ChangePointSet(indices=tuple(int(p) + 1 for p in peaks), horizon=x.size)


def hausdorff(t_true: ChangePointSet, t_pred: ChangePointSet) -> float:
    horizon = max(t_true.horizon, t_pred.horizon)
    if not len(t_true) or not len(t_pred):
        logger.debug("hausdorff_empty_set", extra={"horizon": horizon})
        return float(horizon)
    a = np.asarray(t_true.indices, dtype=np.float64)
    b = np.asarray(t_pred.indices, dtype=np.float64)
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=0).max(), dist.min(axis=1).max()))
