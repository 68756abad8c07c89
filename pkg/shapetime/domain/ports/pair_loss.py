from __future__ import annotations

from typing import Protocol

import numpy as np


class PairLoss(Protocol):
    """Batched loss over (B, n, d) pairs: per-sample values (B,) and the gradient wrt the prediction."""

    def __call__(self, y_pred: np.ndarray, y_true: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ...


class PairMetric(Protocol):
    """Batched distortion over (B, n, d) pairs returning per-sample values (B,)."""

    def __call__(self, y_pred: np.ndarray, y_true: np.ndarray) -> np.ndarray:
        ...
