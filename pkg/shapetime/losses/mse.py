from __future__ import annotations

import numpy as np

from shapetime.domain.entities import SeriesLike, as_values
from shapetime.losses._common import check_finite, check_pair


def mse_batch(y_pred: np.ndarray, y_true: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    yp, yt = check_pair(y_pred, y_true)
    diff = yp - yt
    size = diff.shape[1] * diff.shape[2]
    values = np.square(diff).reshape(diff.shape[0], -1).mean(axis=1)
    check_finite(values, "mse")
    return values, 2.0 * diff / size


def mse_loss(y_pred: SeriesLike, y_true: SeriesLike) -> tuple[float, np.ndarray]:
    values, grads = mse_batch(as_values(y_pred), as_values(y_true))
    return float(values[0]), grads[0]
