from __future__ import annotations

import logging
from typing import Any

import numpy as np
import torch

from shapetime.autodiff import CustomOp, register_custom_op
from shapetime.kernels.dpp import QUALITY_FLOOR, dpp_loss_batch
from shapetime.kernels.similarity import GramResult, gram_batch

logger = logging.getLogger(__name__)


def _gram_forward(sets: np.ndarray, **params: Any) -> tuple[np.ndarray, GramResult]:
    res = gram_batch(
        sets,
        params.get("kind", "shape"),
        gamma=params["gamma"],
        cost_kind=params.get("cost_kind", "half_gaussian"),
        need_grad=True,
    )
    return res.k, res


def _gram_backward(saved: GramResult, upstream: np.ndarray) -> tuple[np.ndarray]:
    return (saved.pullback(upstream),)


def _dpp_forward(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return dpp_loss_batch(k)


def _dpp_backward(grad: np.ndarray, upstream: np.ndarray) -> tuple[np.ndarray]:
    return (grad * np.asarray(upstream).reshape(-1, 1, 1),)


GRAM_OP = register_custom_op(CustomOp(name="gram", forward=_gram_forward, backward=_gram_backward))
DPP_OP = register_custom_op(CustomOp(name="dpp_diversity", forward=_dpp_forward, backward=_dpp_backward))


def gram_t(sets: torch.Tensor, kind: str, *, gamma: float, cost_kind: str = "half_gaussian") -> torch.Tensor:
    return GRAM_OP(sets, kind=kind, gamma=gamma, cost_kind=cost_kind)


def normalize_kernel_t(k: torch.Tensor) -> torch.Tensor:
    diag = torch.sqrt(torch.diagonal(k, dim1=-2, dim2=-1))
    return k / (diag.unsqueeze(-1) * diag.unsqueeze(-2))


def quality_t(dilate_values: torch.Tensor, mu: float, *, floor: float = QUALITY_FLOOR) -> torch.Tensor:
    q = mu * (1.0 - dilate_values)
    clamped = int((q < floor).sum().item())
    if clamped:
        logger.warning("quality_clamped", extra={"clamped": clamped, "size": int(q.numel()), "floor": floor})
    return torch.clamp(q, min=floor)


def quality_regularize_t(k: torch.Tensor, q: torch.Tensor) -> torch.Tensor:
    return q.unsqueeze(-1) * k * q.unsqueeze(-2)


def dpp_diversity_t(k: torch.Tensor) -> torch.Tensor:
    """Per-set loss values (M,) for kernels (M, N, N)."""
    return DPP_OP(k)
