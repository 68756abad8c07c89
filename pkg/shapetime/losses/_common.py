from __future__ import annotations

import numpy as np

from shapetime.core.errors import DimensionError, NonFiniteError


def as_batch(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"expected (n, d) or (B, n, d) series, got shape {arr.shape}")
    return arr


def check_pair(y_pred: np.ndarray, y_true: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    yp = as_batch(y_pred)
    yt = as_batch(y_true)
    if yp.shape != yt.shape:
        raise DimensionError(f"prediction {yp.shape} and target {yt.shape} must share length and dimension")
    return yp, yt


def check_finite(values: np.ndarray, term: str) -> None:
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteError(f"non-finite {term} loss", sample=int(bad[0]), term=term)
