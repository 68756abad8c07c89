from __future__ import annotations

import logging
import threading
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
import torch

from shapetime.autodiff.ops import DTYPE

logger = logging.getLogger(__name__)

ForwardFn = Callable[..., tuple[np.ndarray, Any]]
BackwardFn = Callable[[Any, np.ndarray], tuple[np.ndarray | None, ...]]


@dataclass(frozen=True)
class CustomOp:
    """A numpy forward/backward pair exposed to autograd without tracing its internals.

    `forward(*arrays, **params)` returns `(output, saved_state)`;
    `backward(saved_state, upstream)` returns one gradient (or None) per array input.
    """

    name: str
    forward: ForwardFn
    backward: BackwardFn


class OpHandle:
    def __init__(self, *, op: CustomOp, function: type[torch.autograd.Function]) -> None:
        self.op = op
        self._function = function

    @property
    def name(self) -> str:
        return self.op.name

    def __call__(self, *inputs: torch.Tensor, **params: Any) -> torch.Tensor:
        return self._function.apply(params, *inputs)

    def __repr__(self) -> str:
        return f"OpHandle({self.op.name!r})"


_REGISTRY: dict[str, OpHandle] = {}
_LOCK = threading.Lock()


def _to_numpy(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().numpy().astype(np.float64, copy=False)


def register_custom_op(op: CustomOp) -> OpHandle:
    class _Function(torch.autograd.Function):
        @staticmethod
        def forward(ctx: Any, params: dict[str, Any], *inputs: torch.Tensor) -> torch.Tensor:
            out, saved = op.forward(*(_to_numpy(t) for t in inputs), **params)
            ctx.saved_state = saved
            return torch.as_tensor(np.asarray(out, dtype=np.float64), dtype=DTYPE)

        @staticmethod
        def backward(ctx: Any, grad_out: torch.Tensor) -> tuple[torch.Tensor | None, ...]:
            grads = op.backward(ctx.saved_state, _to_numpy(grad_out))
            return (None, *(None if g is None else torch.as_tensor(g, dtype=DTYPE) for g in grads))

    _Function.__name__ = f"{op.name}_function"
    _Function.__qualname__ = _Function.__name__
    handle = OpHandle(op=op, function=_Function)

    with _LOCK:
        if op.name in _REGISTRY:
            logger.debug("custom_op_replaced", extra={"op": op.name})
        _REGISTRY[op.name] = handle
    return handle


def get_op(name: str) -> OpHandle:
    with _LOCK:
        return _REGISTRY[name]


def registered_ops() -> list[str]:
    with _LOCK:
        return sorted(_REGISTRY)
