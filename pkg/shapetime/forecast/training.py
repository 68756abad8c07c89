from __future__ import annotations

import copy
import logging
from collections import deque
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from shapetime.autodiff import DTYPE
from shapetime.core.errors import NonFiniteError
from shapetime.domain.entities import DatasetSplit, SplitTriple
from shapetime.domain.schemas import AdamConfig, EpochRecord, TrainConfig
from shapetime.forecast.mlp import MlpForecaster
from shapetime.losses import loss_fn

logger = logging.getLogger(__name__)

SMOOTHING_WINDOW = 10


@dataclass
class EarlyStopping:
    """Tracks the best validation loss and a copy of the weights that achieved it."""

    patience: int
    best: float = float("inf")
    best_epoch: int = -1
    best_state: dict[str, torch.Tensor] | None = None
    _stale: int = 0

    def update(self, epoch: int, valid_loss: float, module: nn.Module) -> bool:
        """Record one epoch; True once patience is exhausted."""
        if valid_loss < self.best:
            self.best = valid_loss
            self.best_epoch = epoch
            self.best_state = copy.deepcopy(module.state_dict())
            self._stale = 0
            return False
        self._stale += 1
        return self._stale >= self.patience

    def restore(self, module: nn.Module) -> None:
        if self.best_state is not None:
            module.load_state_dict(self.best_state)


@dataclass
class InstabilityMonitor:
    """Flags epochs where the moving average of the training loss goes up."""

    window: int = SMOOTHING_WINDOW
    _recent: deque[float] = field(default_factory=deque)
    _last_avg: float | None = None

    def observe(self, epoch: int, loss: float) -> bool:
        self._recent.append(loss)
        if len(self._recent) > self.window:
            self._recent.popleft()
        if len(self._recent) < self.window:
            return False
        avg = float(np.mean(self._recent))
        rising = self._last_avg is not None and avg > self._last_avg
        self._last_avg = avg
        if rising:
            logger.warning("training_instability", extra={"epoch": epoch, "smoothed_loss": avg})
        return rising


@dataclass(frozen=True)
class TrainResult:
    model: nn.Module
    log: list[EpochRecord]
    best_epoch: int
    instabilities: int = 0


def make_adam(params: Sequence[nn.Parameter] | Iterator[nn.Parameter], cfg: AdamConfig) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=cfg.lr, betas=(cfg.beta1, cfg.beta2), eps=cfg.eps)


def to_tensor(values: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.ascontiguousarray(values), dtype=DTYPE)


def minibatches(size: int, batch_size: int, generator: torch.Generator) -> Iterator[torch.Tensor]:
    order = torch.randperm(size, generator=generator)
    for start in range(0, size, batch_size):
        yield order[start : start + batch_size]


def _evaluate(
    model: nn.Module,
    criterion: Callable[[torch.Tensor, torch.Tensor], torch.Tensor],
    x: torch.Tensor,
    y: torch.Tensor,
    batch_size: int,
) -> float:
    total = 0.0
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            xb, yb = x[start : start + batch_size], y[start : start + batch_size]
            total += float(criterion(model(xb), yb)) * xb.shape[0]
    return total / max(x.shape[0], 1)


def _guarded_step(
    criterion: Callable[[torch.Tensor, torch.Tensor], torch.Tensor],
    pred: torch.Tensor,
    target: torch.Tensor,
    index: torch.Tensor,
) -> torch.Tensor:
    try:
        loss = criterion(pred, target)
    except NonFiniteError as exc:
        extra = exc.extra or {}
        local = extra.get("sample")
        sample = int(index[local]) if local is not None else None
        raise NonFiniteError(f"non-finite training loss at sample {sample}", sample=sample, term=extra.get("term")) from exc
    if not torch.isfinite(loss):
        raise NonFiniteError("non-finite training loss", sample=None, term="batch")
    return loss


def fit(
    model: nn.Module,
    *,
    parameters: Sequence[nn.Parameter],
    train_epoch: Callable[[torch.optim.Optimizer, int], float],
    valid_loss: Callable[[], float],
    epochs: int,
    patience: int,
    optimizer_cfg: AdamConfig,
    phase: str = "train",
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    """Adam with early stopping on the validation loss; the best weights are restored at the end."""
    optimizer = make_adam(parameters, optimizer_cfg)
    stopper = EarlyStopping(patience=patience)
    monitor = InstabilityMonitor()
    log: list[EpochRecord] = []
    instabilities = 0

    for epoch in range(epochs):
        model.train()
        train_loss = train_epoch(optimizer, epoch)
        model.eval()
        v_loss = valid_loss()
        stop = stopper.update(epoch, v_loss, model)
        instabilities += int(monitor.observe(epoch, train_loss))

        record = EpochRecord(epoch=epoch, train_loss=train_loss, valid_loss=v_loss, best_valid=stopper.best, phase=phase)
        log.append(record)
        logger.info("epoch_end", extra=record.model_dump())
        if on_epoch is not None:
            on_epoch(record)
        if stop:
            logger.info("early_stop", extra={"epoch": epoch, "best_epoch": stopper.best_epoch, "phase": phase})
            break

    stopper.restore(model)
    return TrainResult(model=model, log=log, best_epoch=stopper.best_epoch, instabilities=instabilities)


def _pairs(split: DatasetSplit) -> tuple[torch.Tensor, torch.Tensor]:
    x, y = split.pairs()
    return to_tensor(x), to_tensor(y)


def build_mlp(data: SplitTriple, cfg: TrainConfig) -> MlpForecaster:
    generator = torch.Generator().manual_seed(int(cfg.seed))
    return MlpForecaster(
        context_length=data.train.context_length,
        horizon=data.train.horizon,
        dim=int(data.train.inputs.shape[-1]),
        hidden=cfg.hidden,
        activation=cfg.activation,
        generator=generator,
    )


def train_deterministic(
    data: SplitTriple,
    cfg: TrainConfig,
    *,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    model = build_mlp(data, cfg)
    criterion = loss_fn(cfg.loss, cfg.dilate)
    x_train, y_train = _pairs(data.train)
    x_valid, y_valid = _pairs(data.valid)
    shuffle = torch.Generator().manual_seed(int(cfg.seed) + 1)

    def train_epoch(optimizer: torch.optim.Optimizer, epoch: int) -> float:
        total = 0.0
        for index in minibatches(x_train.shape[0], cfg.batch_size, shuffle):
            optimizer.zero_grad()
            loss = _guarded_step(criterion, model(x_train[index]), y_train[index], index)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * index.numel()
        return total / x_train.shape[0]

    logger.info(
        "train_start",
        extra={"loss": cfg.loss, "alpha": cfg.dilate.alpha, "gamma": cfg.dilate.gamma, "epochs": cfg.epochs},
    )
    return fit(
        model,
        parameters=list(model.parameters()),
        train_epoch=train_epoch,
        valid_loss=lambda: _evaluate(model, criterion, x_valid, y_valid, cfg.batch_size),
        epochs=cfg.epochs,
        patience=cfg.patience,
        optimizer_cfg=cfg.optimizer,
        on_epoch=on_epoch,
    )


@torch.no_grad()
def predict(model: nn.Module, inputs: np.ndarray, batch_size: int = 500) -> np.ndarray:
    model.eval()
    x = to_tensor(inputs)
    outs = [model(x[s : s + batch_size]) for s in range(0, x.shape[0], batch_size)]
    return torch.cat(outs).numpy() if outs else np.zeros((0,))
