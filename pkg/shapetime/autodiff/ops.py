from __future__ import annotations

from collections.abc import Sequence

import torch

from shapetime.core.errors import DimensionError

DTYPE = torch.float64


def tensor(values: object, *, requires_grad: bool = False) -> torch.Tensor:
    out = torch.as_tensor(values, dtype=DTYPE)
    if requires_grad:
        out = out.clone().requires_grad_(True)
    return out


def _is_scalar(t: torch.Tensor) -> bool:
    return t.dim() == 0 or t.numel() == 1


def _check_broadcast(op: str, a: torch.Tensor, b: torch.Tensor) -> None:
    # equal shapes, scalar against tensor, or a row-vector bias on the last axis
    if a.shape == b.shape or _is_scalar(a) or _is_scalar(b):
        return
    if b.dim() == 1 and a.dim() >= 2 and a.shape[-1] == b.shape[0]:
        return
    raise DimensionError(f"{op}: shapes {tuple(a.shape)} and {tuple(b.shape)} do not conform")


def add(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("add", a, b)
    return a + b


def sub(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("sub", a, b)
    return a - b


def mul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("mul", a, b)
    return a * b


def matmul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    if a.dim() not in (1, 2) or b.dim() not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise DimensionError(f"matmul: shapes {tuple(a.shape)} and {tuple(b.shape)} do not conform")
    return a @ b


def sum(a: torch.Tensor, dim: int | None = None) -> torch.Tensor:  # noqa: A001
    return a.sum() if dim is None else a.sum(dim=dim)


def mean(a: torch.Tensor, dim: int | None = None) -> torch.Tensor:
    return a.mean() if dim is None else a.mean(dim=dim)


def exp(a: torch.Tensor) -> torch.Tensor:
    return torch.exp(a)


def log(a: torch.Tensor) -> torch.Tensor:
    return torch.log(a)


def tanh(a: torch.Tensor) -> torch.Tensor:
    return torch.tanh(a)


def relu(a: torch.Tensor) -> torch.Tensor:
    return torch.relu(a)


def scale(a: torch.Tensor, factor: float) -> torch.Tensor:
    return a * float(factor)


def slice(a: torch.Tensor, start: int, stop: int, dim: int = 0) -> torch.Tensor:  # noqa: A001
    size = a.shape[dim]
    if not (0 <= start <= stop <= size):
        raise DimensionError(f"slice [{start}:{stop}] out of range for axis of size {size}")
    return a.narrow(dim, start, stop - start)


def concat(tensors: Sequence[torch.Tensor], dim: int = 0) -> torch.Tensor:
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    ref = tensors[0]
    for t in tensors[1:]:
        if t.dim() != ref.dim() or any(t.shape[k] != ref.shape[k] for k in range(ref.dim()) if k != dim % ref.dim()):
            raise DimensionError(f"concat: shapes {tuple(ref.shape)} and {tuple(t.shape)} do not conform")
    return torch.cat(list(tensors), dim=dim)
