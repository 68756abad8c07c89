from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from shapetime.core.errors import DimensionError
from shapetime.domain.entities import SeriesLike, as_values
from shapetime.domain.ports.pair_loss import PairMetric


def _stack(items: Sequence[SeriesLike] | np.ndarray) -> np.ndarray:
    if isinstance(items, np.ndarray) and items.ndim == 3:
        return items.astype(np.float64, copy=False)
    if len(items) == 0:
        raise DimensionError("trajectory set must be non-empty")
    return np.stack([as_values(it) for it in items])


def crps_ensemble(samples: Sequence[SeriesLike] | np.ndarray, y_true: SeriesLike) -> float:
    x = _stack(samples)
    y = as_values(y_true)
    if x.shape[1:] != y.shape:
        raise DimensionError(f"samples {x.shape[1:]} and target {y.shape} differ in shape")
    n = x.shape[0]
    skill = np.abs(x - y[None]).mean(axis=0)
    spread = np.abs(x[:, None] - x[None, :]).sum(axis=(0, 1)) / (2.0 * n * n)
    return float(np.mean(skill - spread))


def cross_loss_matrix(
    preds: Sequence[SeriesLike] | np.ndarray,
    futures: Sequence[SeriesLike] | np.ndarray,
    loss: PairMetric,
) -> np.ndarray:
    """loss(pred_i, future_j) for every pair, shape (P, F)."""
    p = _stack(preds)
    f = _stack(futures)
    rows = np.repeat(p, f.shape[0], axis=0)
    cols = np.tile(f, (p.shape[0], 1, 1))
    return np.asarray(loss(rows, cols), dtype=np.float64).reshape(p.shape[0], f.shape[0])


def h_quality(preds: Sequence[SeriesLike] | np.ndarray, futures: Sequence[SeriesLike] | np.ndarray, loss: PairMetric) -> float:
    return float(cross_loss_matrix(preds, futures, loss).min(axis=1).mean())


def h_diversity(preds: Sequence[SeriesLike] | np.ndarray, futures: Sequence[SeriesLike] | np.ndarray, loss: PairMetric) -> float:
    return float(cross_loss_matrix(preds, futures, loss).min(axis=0).mean())


def h_measures(cross: np.ndarray) -> tuple[float, float, float]:
    """(h_quality, h_diversity, f1) from a precomputed (P, F) cross-loss matrix."""
    hq = float(cross.min(axis=1).mean())
    hd = float(cross.min(axis=0).mean())
    return hq, hd, f1(hq, hd)


def f1(hq: float, hd: float) -> float:
    """Harmonic mean of two losses; lower is better."""
    if hq + hd == 0.0:
        return 0.0
    return 2.0 * hq * hd / (hq + hd)


def best_sample(samples: Sequence[SeriesLike] | np.ndarray, y_true: SeriesLike, loss: PairMetric) -> float:
    return float(cross_loss_matrix(samples, [y_true], loss).min())


def mean_sample(samples: Sequence[SeriesLike] | np.ndarray, y_true: SeriesLike, loss: PairMetric) -> float:
    return float(cross_loss_matrix(samples, [y_true], loss).mean())
