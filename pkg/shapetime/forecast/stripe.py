from __future__ import annotations

from typing import Any

import torch
from torch import nn

from shapetime.core.errors import DimensionError
from shapetime.forecast.layers import init_uniform_, mlp


def kl_standard_normal(mu: torch.Tensor, log_sigma: torch.Tensor) -> torch.Tensor:
    """KL(N(mu, sigma^2) || N(0, I)) summed over the last axis."""
    return 0.5 * (torch.exp(2.0 * log_sigma) + mu * mu - 1.0 - 2.0 * log_sigma).sum(dim=-1)


class StripeModel(nn.Module):
    """Deterministic context code h plus shape and time latent codes, a posterior network and two proposal networks."""

    def __init__(
        self,
        *,
        context_length: int,
        horizon: int,
        dim: int = 1,
        hidden: int = 128,
        code_dim: int = 8,
        n_shape: int = 10,
        n_time: int = 10,
        proposal_hidden: int = 128,
        generator: torch.Generator | None = None,
    ) -> None:
        super().__init__()
        self.context_length = int(context_length)
        self.horizon = int(horizon)
        self.dim = int(dim)
        self.hidden = int(hidden)
        self.code_dim = int(code_dim)
        self.n_shape = int(n_shape)
        self.n_time = int(n_time)
        self.proposal_hidden = int(proposal_hidden)

        t_in = self.context_length * self.dim
        t_out = self.horizon * self.dim
        k = self.code_dim
        self.encoder = mlp([t_in, self.hidden, self.hidden], "relu")
        self.posterior = mlp([t_in + t_out, self.hidden, 4 * k], "relu")
        self.decoder = mlp([self.hidden + 2 * k, self.hidden, t_out], "relu")
        self.proposal_shape = mlp([self.hidden, self.proposal_hidden, self.n_shape * k], "leaky_relu")
        self.proposal_time = mlp([self.hidden, self.proposal_hidden, self.n_time * k], "leaky_relu")
        init_uniform_(self, generator if generator is not None else torch.Generator().manual_seed(0))

    def _flat(self, x: torch.Tensor, length: int) -> torch.Tensor:
        if x.dim() != 3 or x.shape[1:] != (length, self.dim):
            raise DimensionError(f"expected (B, {length}, {self.dim}) series, got {tuple(x.shape)}")
        return x.reshape(x.shape[0], -1)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        return self.encoder(self._flat(x, self.context_length))

    def posterior_params(self, x: torch.Tensor, y: torch.Tensor) -> tuple[torch.Tensor, ...]:
        """(mu_s, log_sigma_s, mu_t, log_sigma_t), each (B, k)."""
        out = self.posterior(torch.cat([self._flat(x, self.context_length), self._flat(y, self.horizon)], dim=1))
        return tuple(out.split(self.code_dim, dim=1))

    def decode(self, h: torch.Tensor, z_s: torch.Tensor, z_t: torch.Tensor) -> torch.Tensor:
        """Decode codes whose leading axes match h's batch axis; extra candidate axes are allowed on the codes."""
        lead = z_s.shape[:-1]
        h_b = h.reshape(h.shape[0], *([1] * (len(lead) - 1)), h.shape[-1]).expand(*lead, h.shape[-1])
        out = self.decoder(torch.cat([h_b, z_s, z_t], dim=-1))
        return out.reshape(*lead, self.horizon, self.dim)

    def propose_shape(self, h: torch.Tensor) -> torch.Tensor:
        return self.proposal_shape(h).reshape(h.shape[0], self.n_shape, self.code_dim)

    def propose_time(self, h: torch.Tensor) -> torch.Tensor:
        return self.proposal_time(h).reshape(h.shape[0], self.n_time, self.code_dim)

    def predictor_modules(self) -> list[nn.Module]:
        return [self.encoder, self.posterior, self.decoder]

    def proposal_modules(self) -> list[nn.Module]:
        return [self.proposal_shape, self.proposal_time]

    def architecture(self) -> dict[str, Any]:
        return {
            "kind": "stripe",
            "context_length": self.context_length,
            "horizon": self.horizon,
            "dim": self.dim,
            "hidden": self.hidden,
            "code_dim": self.code_dim,
            "n_shape": self.n_shape,
            "n_time": self.n_time,
            "proposal_hidden": self.proposal_hidden,
        }

    @classmethod
    def from_architecture(cls, arch: dict[str, Any]) -> "StripeModel":
        return cls(**{k: int(v) for k, v in arch.items() if k != "kind"})


def reparameterize(mu: torch.Tensor, log_sigma: torch.Tensor, eps: torch.Tensor) -> torch.Tensor:
    return mu + torch.exp(log_sigma) * eps


@torch.no_grad()
def sample_futures(model: StripeModel, x: torch.Tensor) -> torch.Tensor:
    """Every (shape proposal, time proposal) combination: (B, N_s * N_t, tau, d); the posterior network is unused."""
    if x.dim() == 2:
        x = x.unsqueeze(0)
    h = model.encode(x)
    z_s = model.propose_shape(h)
    z_t = model.propose_time(h)
    b, n_s, k = z_s.shape
    n_t = z_t.shape[1]
    grid_s = z_s.unsqueeze(2).expand(b, n_s, n_t, k).reshape(b, n_s * n_t, k)
    grid_t = z_t.unsqueeze(1).expand(b, n_s, n_t, k).reshape(b, n_s * n_t, k)
    return model.decode(h, grid_s, grid_t)


@torch.no_grad()
def sample_prior_futures(model: StripeModel, x: torch.Tensor, n: int, generator: torch.Generator) -> torch.Tensor:
    """n futures per input with both codes drawn from the standard normal prior: (B, n, tau, d)."""
    if x.dim() == 2:
        x = x.unsqueeze(0)
    h = model.encode(x)
    shape = (h.shape[0], int(n), model.code_dim)
    z_s = torch.randn(shape, generator=generator, dtype=h.dtype)
    z_t = torch.randn(shape, generator=generator, dtype=h.dtype)
    return model.decode(h, z_s, z_t)
