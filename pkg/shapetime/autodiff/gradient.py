from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np
import torch

from shapetime.core.errors import ContractError


def backward(loss: torch.Tensor, params: Mapping[str, torch.Tensor]) -> dict[str, torch.Tensor]:
    """One reverse sweep from a scalar loss; leaves the loss does not depend on get zero gradients."""
    if loss.numel() != 1:
        raise ContractError(f"loss must be scalar, got shape {tuple(loss.shape)}")

    names = list(params)
    leaves = [params[n] for n in names]
    if not loss.requires_grad:
        return {n: torch.zeros_like(p) for n, p in zip(names, leaves, strict=True)}

    grads = torch.autograd.grad(loss.reshape(()), leaves, allow_unused=True)
    return {
        n: torch.zeros_like(p) if g is None else g.detach()
        for n, p, g in zip(names, leaves, grads, strict=True)
    }


def finite_difference_grad(f: Callable[[np.ndarray], float], x: np.ndarray, *, h: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function over every entry of x."""
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        plus = float(f(x))
        flat[k] = orig - h
        minus = float(f(x))
        flat[k] = orig
        gflat[k] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray, *, floor: float = 1e-12) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), floor)
    return float(np.linalg.norm(a - b) / denom)
