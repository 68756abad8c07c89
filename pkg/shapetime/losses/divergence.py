from __future__ import annotations

import numpy as np

from shapetime.alignment import chain_to_series
from shapetime.domain.entities import SeriesLike, as_values
from shapetime.domain.schemas import DilateConfig
from shapetime.losses._common import check_pair
from shapetime.losses.dilate import _combine, _terms


def _self_grad(y: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    # both arguments of L(y, y) move with y
    terms = _terms(y, y, cfg, need_grad=True)
    gy, gz = chain_to_series(terms.weights, terms.dcost)
    return _combine(cfg, terms), gy + gz


def dilate_div_batch(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    """L(y, z) - (L(y, y) + L(z, z)) / 2 for L = DILATE; gradient w.r.t. y."""
    yp, yt = check_pair(y_pred, y_true)
    cross = _terms(yp, yt, cfg, need_grad=True)
    cross_grad, _ = chain_to_series(cross.weights, cross.dcost)
    self_pred, self_pred_grad = _self_grad(yp, cfg)
    self_true = _combine(cfg, _terms(yt, yt, cfg, need_grad=False))
    values = _combine(cfg, cross) - 0.5 * (self_pred + self_true)
    return values, cross_grad - 0.5 * self_pred_grad


def dtw_div_batch(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    return dilate_div_batch(y_pred, y_true, cfg.model_copy(update={"alpha": 1.0}))


def dtw_div(y: SeriesLike, z: SeriesLike, cfg: DilateConfig) -> float:
    values, _ = dtw_div_batch(as_values(y), as_values(z), cfg)
    return float(values[0])


def dilate_div(y: SeriesLike, z: SeriesLike, cfg: DilateConfig) -> float:
    values, _ = dilate_div_batch(as_values(y), as_values(z), cfg)
    return float(values[0])
