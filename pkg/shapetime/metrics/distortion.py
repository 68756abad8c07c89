from __future__ import annotations

from functools import partial

import numpy as np

from shapetime.alignment import cost_matrix_batch, hard_dtw_batch, omega_dissim
from shapetime.core.errors import ParameterError
from shapetime.domain.ports.pair_loss import PairMetric
from shapetime.domain.schemas import DilateConfig
from shapetime.losses import dilate_batch, soft_dtw_loss_batch
from shapetime.losses._common import check_pair


def dtw_metric(y_pred: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Hard DTW with the euclidean cost, per sample."""
    yp, yt = check_pair(y_pred, y_true)
    values, _ = hard_dtw_batch(cost_matrix_batch(yp, yt))
    return values


def tdi_metric(y_pred: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Hard TDI: the optimal euclidean DTW path against the normalized quadratic penalty."""
    yp, yt = check_pair(y_pred, y_true)
    _, paths = hard_dtw_batch(cost_matrix_batch(yp, yt))
    omega = omega_dissim(yp.shape[1], yt.shape[1]).omega
    return np.einsum("bnm,nm->b", paths, omega)


def mse_metric(y_pred: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    yp, yt = check_pair(y_pred, y_true)
    return np.square(yp - yt).reshape(yp.shape[0], -1).mean(axis=1)


def _dilate_values(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> np.ndarray:
    return dilate_batch(y_pred, y_true, cfg, need_grad=False).value


def _soft_dtw_values(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> np.ndarray:
    return soft_dtw_loss_batch(y_pred, y_true, cfg)[0]


def dilate_metric(cfg: DilateConfig | None = None) -> PairMetric:
    return partial(_dilate_values, cfg=cfg or DilateConfig())


def soft_dtw_metric(cfg: DilateConfig | None = None) -> PairMetric:
    return partial(_soft_dtw_values, cfg=cfg or DilateConfig())


def metric_fn(name: str, cfg: DilateConfig | None = None) -> PairMetric:
    fixed = {"dtw": dtw_metric, "tdi": tdi_metric, "mse": mse_metric}
    if name in fixed:
        return fixed[name]
    if name == "dilate":
        return dilate_metric(cfg)
    if name == "soft_dtw":
        return soft_dtw_metric(cfg)
    raise ParameterError(f"unknown metric {name!r}")
