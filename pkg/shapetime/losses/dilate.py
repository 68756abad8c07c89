from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shapetime.alignment import (
    build_omega,
    chain_to_series,
    cost_grad,
    cost_matrix_batch,
    dtw_hvp_from_tables,
    soft_dtw_tables,
)
from shapetime.domain.entities import SeriesLike, as_values
from shapetime.domain.schemas import DilateConfig
from shapetime.losses._common import check_finite, check_pair


@dataclass(frozen=True)
class DilateResult:
    """Per-sample DILATE values with their shape and temporal terms; grad is w.r.t. the prediction."""

    value: np.ndarray
    shape: np.ndarray
    temporal: np.ndarray
    grad: np.ndarray


@dataclass(frozen=True)
class _Terms:
    shape: np.ndarray
    temporal: np.ndarray
    weights: np.ndarray | None
    dcost: np.ndarray | None


def _terms(yp: np.ndarray, yt: np.ndarray, cfg: DilateConfig, *, need_grad: bool) -> _Terms:
    n, m = yp.shape[1], yt.shape[1]
    delta = cost_matrix_batch(yp, yt, cfg.cost_kind, cfg.gamma)
    tables = soft_dtw_tables(delta, cfg.gamma)
    omega = build_omega(cfg.omega, n, m).omega
    e = tables.alignment
    shape = tables.values
    temporal = np.einsum("bnm,nm->b", e, omega)
    check_finite(shape, "shape")
    check_finite(temporal, "temporal")
    if not need_grad:
        return _Terms(shape=shape, temporal=temporal, weights=None, dcost=None)

    weights = cfg.alpha * e
    if cfg.alpha < 1.0:
        weights = weights + (1.0 - cfg.alpha) * dtw_hvp_from_tables(tables, omega)
    return _Terms(shape=shape, temporal=temporal, weights=weights, dcost=cost_grad(yp, yt, cfg.cost_kind, cfg.gamma))


def _combine(cfg: DilateConfig, terms: _Terms) -> np.ndarray:
    return cfg.alpha * terms.shape + (1.0 - cfg.alpha) * terms.temporal


def dilate_batch(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig, *, need_grad: bool = True) -> DilateResult:
    yp, yt = check_pair(y_pred, y_true)
    terms = _terms(yp, yt, cfg, need_grad=need_grad)
    grad = np.zeros_like(yp)
    if need_grad:
        grad, _ = chain_to_series(terms.weights, terms.dcost)
    return DilateResult(value=_combine(cfg, terms), shape=terms.shape, temporal=terms.temporal, grad=grad)


def dilate(y_pred: SeriesLike, y_true: SeriesLike, cfg: DilateConfig) -> tuple[float, np.ndarray]:
    res = dilate_batch(as_values(y_pred), as_values(y_true), cfg)
    return float(res.value[0]), res.grad[0]


def dilate_t_batch(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    """Soft-DTW on the blended cost alpha * Delta + (1 - alpha) * Omega."""
    yp, yt = check_pair(y_pred, y_true)
    omega = build_omega(cfg.omega, yp.shape[1], yt.shape[1]).omega
    blended = cfg.alpha * cost_matrix_batch(yp, yt, cfg.cost_kind, cfg.gamma) + (1.0 - cfg.alpha) * omega
    tables = soft_dtw_tables(blended, cfg.gamma)
    values = tables.values
    check_finite(values, "dilate_t")
    grad, _ = chain_to_series(cfg.alpha * tables.alignment, cost_grad(yp, yt, cfg.cost_kind, cfg.gamma))
    return values, grad


def dilate_t(y_pred: SeriesLike, y_true: SeriesLike, cfg: DilateConfig) -> float:
    values, _ = dilate_t_batch(as_values(y_pred), as_values(y_true), cfg)
    return float(values[0])
