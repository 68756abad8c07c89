from __future__ import annotations

import logging
from collections.abc import Callable

import torch

from shapetime.domain.entities import SplitTriple
from shapetime.domain.schemas import EpochRecord, StripeConfig
from shapetime.forecast.stripe import StripeModel, kl_standard_normal, reparameterize
from shapetime.forecast.training import TrainResult, fit, make_adam, minibatches, to_tensor
from shapetime.kernels import QUALITY_FLOOR, dpp_diversity_t, gram_t, normalize_kernel_t, quality_regularize_t, quality_t
from shapetime.losses import per_sample_loss

logger = logging.getLogger(__name__)


def build_stripe(data: SplitTriple, cfg: StripeConfig) -> StripeModel:
    return StripeModel(
        context_length=data.train.context_length,
        horizon=data.train.horizon,
        dim=int(data.train.inputs.shape[-1]),
        hidden=cfg.hidden,
        code_dim=cfg.code_dim,
        n_shape=cfg.n_shape,
        n_time=cfg.n_time,
        proposal_hidden=cfg.proposal_hidden,
        generator=torch.Generator().manual_seed(int(cfg.seed)),
    )


def prediction_loss(
    model: StripeModel,
    x: torch.Tensor,
    y: torch.Tensor,
    eps_s: torch.Tensor,
    eps_t: torch.Tensor,
    cfg: StripeConfig,
) -> torch.Tensor:
    """Batch mean of DILATE(decoded, y) + KL_shape + KL_time with the given standard-normal draws."""
    h = model.encode(x)
    mu_s, ls_s, mu_t, ls_t = model.posterior_params(x, y)
    y_hat = model.decode(h, reparameterize(mu_s, ls_s, eps_s), reparameterize(mu_t, ls_t, eps_t))
    quality = per_sample_loss("dilate", cfg.dilate)(y_hat, y)
    return (quality + kl_standard_normal(mu_s, ls_s) + kl_standard_normal(mu_t, ls_t)).mean()


def _noise(shape: tuple[int, int], generator: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    return (
        torch.randn(shape, generator=generator, dtype=torch.float64),
        torch.randn(shape, generator=generator, dtype=torch.float64),
    )


def train_stripe_predictor(
    model: StripeModel,
    data: SplitTriple,
    cfg: StripeConfig,
    *,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    """Encoder, posterior and decoder on every (input, future) tuple as a separate example."""
    x_train, y_train = (to_tensor(a) for a in data.train.pairs())
    x_valid, y_valid = (to_tensor(a) for a in data.valid.pairs())
    shuffle = torch.Generator().manual_seed(int(cfg.seed) + 1)
    noise = torch.Generator().manual_seed(int(cfg.seed) + 2)
    valid_eps = _noise((x_valid.shape[0], model.code_dim), torch.Generator().manual_seed(int(cfg.seed) + 3))
    params = [p for m in model.predictor_modules() for p in m.parameters()]

    def train_epoch(optimizer: torch.optim.Optimizer, epoch: int) -> float:
        total = 0.0
        for index in minibatches(x_train.shape[0], cfg.batch_size, shuffle):
            eps_s, eps_t = _noise((index.numel(), model.code_dim), noise)
            optimizer.zero_grad()
            loss = prediction_loss(model, x_train[index], y_train[index], eps_s, eps_t, cfg)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * index.numel()
        return total / x_train.shape[0]

    def valid_loss() -> float:
        with torch.no_grad():
            return float(prediction_loss(model, x_valid, y_valid, valid_eps[0], valid_eps[1], cfg))

    return fit(
        model,
        parameters=params,
        train_epoch=train_epoch,
        valid_loss=valid_loss,
        epochs=cfg.predictor_epochs,
        patience=cfg.patience,
        optimizer_cfg=cfg.optimizer,
        phase="predictor",
        on_epoch=on_epoch,
    )


def diversity_loss(
    trajectories: torch.Tensor,
    target: torch.Tensor,
    kind: str,
    cfg: StripeConfig,
    *,
    floor: float = QUALITY_FLOOR,
) -> torch.Tensor:
    """Mean quality-regularized DPP loss over sets of candidate futures (B, N, tau, d) for targets (B, tau, d)."""
    b, n = trajectories.shape[:2]
    k = gram_t(trajectories, kind, gamma=cfg.dilate.gamma, cost_kind=cfg.kernel_cost)
    if cfg.normalize_kernel:
        k = normalize_kernel_t(k)
    flat = trajectories.reshape(b * n, *trajectories.shape[2:])
    repeated = target.unsqueeze(1).expand(b, n, *target.shape[1:]).reshape(b * n, *target.shape[1:])
    q = quality_t(per_sample_loss("dilate", cfg.dilate)(flat, repeated).reshape(b, n), cfg.mu_quality, floor=floor)
    return dpp_diversity_t(quality_regularize_t(k, q)).mean()


def proposal_loss(
    model: StripeModel,
    x: torch.Tensor,
    y: torch.Tensor,
    cfg: StripeConfig,
    *,
    floor: float = QUALITY_FLOOR,
) -> torch.Tensor:
    h = model.encode(x)
    with torch.no_grad():
        mu_s, _, mu_t, _ = model.posterior_params(x, y)

    z_s = model.propose_shape(h)
    shape_futures = model.decode(h, z_s, mu_t.unsqueeze(1).expand(-1, model.n_shape, -1))
    z_t = model.propose_time(h)
    time_futures = model.decode(h, mu_s.unsqueeze(1).expand(-1, model.n_time, -1), z_t)
    shape_loss = diversity_loss(shape_futures, y, "shape", cfg, floor=floor)
    return shape_loss + diversity_loss(time_futures, y, "time", cfg, floor=floor)


def _freeze(model: StripeModel) -> list[bool]:
    flags = []
    for module in model.predictor_modules():
        for p in module.parameters():
            flags.append(p.requires_grad)
            p.requires_grad_(False)
    return flags


def _unfreeze(model: StripeModel, flags: list[bool]) -> None:
    params = [p for m in model.predictor_modules() for p in m.parameters()]
    for p, flag in zip(params, flags, strict=True):
        p.requires_grad_(flag)


def train_stripe_proposals(
    model: StripeModel,
    data: SplitTriple,
    cfg: StripeConfig,
    *,
    on_epoch: Callable[[EpochRecord], None] | None = None,
    quality_floor: float = QUALITY_FLOOR,
) -> TrainResult:
    """Proposal networks only, with the DPP diversity losses; encoder, decoder and posterior stay frozen."""
    x_train, y_train = (to_tensor(a) for a in data.train.pairs())
    x_valid, y_valid = (to_tensor(a) for a in data.valid.pairs())
    shuffle = torch.Generator().manual_seed(int(cfg.seed) + 4)
    params = [p for m in model.proposal_modules() for p in m.parameters()]

    def train_epoch(optimizer: torch.optim.Optimizer, epoch: int) -> float:
        total = 0.0
        for index in minibatches(x_train.shape[0], cfg.batch_size, shuffle):
            optimizer.zero_grad()
            loss = proposal_loss(model, x_train[index], y_train[index], cfg, floor=quality_floor)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * index.numel()
        return total / x_train.shape[0]

    def valid_loss() -> float:
        with torch.no_grad():
            total = 0.0
            for start in range(0, x_valid.shape[0], cfg.batch_size):
                xb, yb = x_valid[start : start + cfg.batch_size], y_valid[start : start + cfg.batch_size]
                total += float(proposal_loss(model, xb, yb, cfg, floor=quality_floor)) * xb.shape[0]
            return total / x_valid.shape[0]

    flags = _freeze(model)
    try:
        return fit(
            model,
            parameters=params,
            train_epoch=train_epoch,
            valid_loss=valid_loss,
            epochs=cfg.proposal_epochs,
            patience=cfg.patience,
            optimizer_cfg=cfg.optimizer,
            phase="proposals",
            on_epoch=on_epoch,
        )
    finally:
        _unfreeze(model, flags)


def optimize_latent_codes(
    model: StripeModel,
    x: torch.Tensor,
    y: torch.Tensor,
    cfg: StripeConfig,
    *,
    steps: int = 100,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Debugging variant without proposal networks: gradient steps on N_s shape codes for one input.

    Returns the decoded (N_s, tau, d) trajectories.
    """
    if x.dim() == 2:
        x, y = x.unsqueeze(0), y.unsqueeze(0)
    gen = generator if generator is not None else torch.Generator().manual_seed(int(cfg.seed))
    flags = _freeze(model)
    try:
        with torch.no_grad():
            h = model.encode(x)
            _, _, mu_t, _ = model.posterior_params(x, y)
        codes = torch.randn((1, model.n_shape, model.code_dim), generator=gen, dtype=h.dtype).requires_grad_(True)
        optimizer = make_adam([codes], cfg.optimizer)
        z_t = mu_t.unsqueeze(1).expand(-1, model.n_shape, -1)
        for step in range(int(steps)):
            optimizer.zero_grad()
            loss = diversity_loss(model.decode(h, codes, z_t), y, "shape", cfg)
            loss.backward()
            optimizer.step()
            if step % 20 == 0:
                logger.debug("latent_codes_step", extra={"step": step, "loss": float(loss.detach())})
        with torch.no_grad():
            return model.decode(h, codes, z_t)[0]
    finally:
        _unfreeze(model, flags)
