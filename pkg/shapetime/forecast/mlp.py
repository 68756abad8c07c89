from __future__ import annotations

from typing import Any

import torch
from torch import nn

from shapetime.core.errors import DimensionError
from shapetime.forecast.layers import Activation, init_uniform_, mlp


class MlpForecaster(nn.Module):
    """One hidden layer mapping a (T, d) context to a (tau, d) forecast."""

    def __init__(
        self,
        *,
        context_length: int,
        horizon: int,
        dim: int = 1,
        hidden: int = 128,
        activation: Activation = "relu",
        generator: torch.Generator | None = None,
    ) -> None:
        super().__init__()
        self.context_length = int(context_length)
        self.horizon = int(horizon)
        self.dim = int(dim)
        self.hidden = int(hidden)
        self.activation = activation
        self.net = mlp([self.context_length * self.dim, self.hidden, self.horizon * self.dim], activation)
        init_uniform_(self, generator if generator is not None else torch.Generator().manual_seed(0))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 3 or x.shape[1:] != (self.context_length, self.dim):
            raise DimensionError(f"expected (B, {self.context_length}, {self.dim}) input, got {tuple(x.shape)}")
        return self.net(x.reshape(x.shape[0], -1)).reshape(x.shape[0], self.horizon, self.dim)

    def architecture(self) -> dict[str, Any]:
        return {
            "kind": "mlp",
            "context_length": self.context_length,
            "horizon": self.horizon,
            "dim": self.dim,
            "hidden": self.hidden,
            "activation": self.activation,
        }

    @classmethod
    def from_architecture(cls, arch: dict[str, Any]) -> "MlpForecaster":
        return cls(
            context_length=int(arch["context_length"]),
            horizon=int(arch["horizon"]),
            dim=int(arch.get("dim", 1)),
            hidden=int(arch["hidden"]),
            activation=arch.get("activation", "relu"),
        )
