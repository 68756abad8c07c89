from __future__ import annotations

from collections.abc import Callable
from functools import partial
from typing import Any

import numpy as np
import torch

from shapetime.alignment import chain_to_series, cost_grad, cost_matrix_batch, soft_dtw_tables
from shapetime.autodiff import CustomOp, OpHandle, register_custom_op
from shapetime.core.errors import ParameterError
from shapetime.domain.ports.pair_loss import PairLoss
from shapetime.domain.schemas import DilateConfig, LossName
from shapetime.losses._common import check_finite, check_pair
from shapetime.losses.dilate import dilate_batch, dilate_t_batch
from shapetime.losses.divergence import dilate_div_batch, dtw_div_batch
from shapetime.losses.mse import mse_batch


def soft_dtw_loss_batch(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    yp, yt = check_pair(y_pred, y_true)
    tables = soft_dtw_tables(cost_matrix_batch(yp, yt, cfg.cost_kind, cfg.gamma), cfg.gamma)
    values = tables.values
    check_finite(values, "shape")
    grad, _ = chain_to_series(tables.alignment, cost_grad(yp, yt, cfg.cost_kind, cfg.gamma))
    return values, grad


def _dilate_pair(y_pred: np.ndarray, y_true: np.ndarray, cfg: DilateConfig) -> tuple[np.ndarray, np.ndarray]:
    res = dilate_batch(y_pred, y_true, cfg)
    return res.value, res.grad


_BATCH_LOSSES: dict[str, Callable[..., tuple[np.ndarray, np.ndarray]]] = {
    "soft_dtw": soft_dtw_loss_batch,
    "dilate": _dilate_pair,
    "dilate_t": dilate_t_batch,
    "dtw_div": dtw_div_batch,
    "dilate_div": dilate_div_batch,
}


def pair_loss(name: LossName, cfg: DilateConfig | None = None) -> PairLoss:
    if name == "mse":
        return mse_batch
    if name not in _BATCH_LOSSES:
        raise ParameterError(f"unknown loss {name!r}")
    return partial(_BATCH_LOSSES[name], cfg=cfg or DilateConfig())


def _make_op(name: str) -> CustomOp:
    def forward(y_pred: np.ndarray, y_true: np.ndarray, **params: Any) -> tuple[np.ndarray, np.ndarray]:
        return pair_loss(name, params.get("cfg"))(y_pred, y_true)  # type: ignore[arg-type]

    def backward(grad: np.ndarray, upstream: np.ndarray) -> tuple[np.ndarray, None]:
        return grad * np.asarray(upstream).reshape(-1, 1, 1), None

    return CustomOp(name=name, forward=forward, backward=backward)


LOSS_OPS: dict[str, OpHandle] = {
    name: register_custom_op(_make_op(name)) for name in ("mse", "soft_dtw", "dilate", "dilate_t", "dtw_div", "dilate_div")
}


def per_sample_loss(name: LossName, cfg: DilateConfig | None = None) -> Callable[[torch.Tensor, torch.Tensor], torch.Tensor]:
    """Per-sample loss vector over (B, tau, d) tensors; gradients flow to the prediction only."""
    if name not in LOSS_OPS:
        raise ParameterError(f"unknown loss {name!r}")
    handle = LOSS_OPS[name]
    params = {} if name == "mse" else {"cfg": cfg or DilateConfig()}

    def fn(y_pred: torch.Tensor, y_true: torch.Tensor) -> torch.Tensor:
        return handle(y_pred, y_true, **params)

    return fn


def loss_fn(name: LossName, cfg: DilateConfig | None = None) -> Callable[[torch.Tensor, torch.Tensor], torch.Tensor]:
    per_sample = per_sample_loss(name, cfg)
    return lambda y_pred, y_true: per_sample(y_pred, y_true).mean()
