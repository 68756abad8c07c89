from __future__ import annotations

import hashlib
import json
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shapetime.domain.entities import CostKind

LossName = Literal["mse", "soft_dtw", "dilate", "dilate_t", "dtw_div", "dilate_div"]
DatasetName = Literal["synthetic-det", "synthetic-prob"]
MetricName = Literal["mse", "dtw", "tdi", "ramp", "hausdorff", "dilate", "soft_dtw"]
ProbMetricName = Literal["h_quality", "h_diversity", "f1", "crps", "best_sample", "mean_sample"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class OmegaSpec(StrictModel):
    kind: Literal["dissim_quadratic", "sakoe_chiba", "weighted"] = "dissim_quadratic"
    normalized: bool = True
    band: int | None = Field(default=None, ge=0)
    power: float = Field(default=2.0, gt=0.0)

    @model_validator(mode="after")
    def _band_required(self) -> "OmegaSpec":
        if self.kind == "sakoe_chiba" and self.band is None:
            raise ValueError("sakoe_chiba omega requires a band width")
        return self


class DilateConfig(StrictModel):
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    gamma: float = Field(default=1e-2, gt=0.0)
    cost_kind: CostKind = "euclidean"
    omega: OmegaSpec = Field(default_factory=OmegaSpec)


class AdamConfig(StrictModel):
    lr: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)


class TrainConfig(StrictModel):
    loss: LossName = "dilate"
    dilate: DilateConfig = Field(default_factory=DilateConfig)
    optimizer: AdamConfig = Field(default_factory=AdamConfig)
    epochs: int = Field(default=1000, ge=0)
    batch_size: int = Field(default=100, ge=1)
    patience: int = Field(default=50, ge=1)
    seed: int = 0
    hidden: int = Field(default=128, ge=1)
    activation: Literal["tanh", "relu"] = "relu"


class StripeConfig(StrictModel):
    dilate: DilateConfig = Field(default_factory=DilateConfig)
    optimizer: AdamConfig = Field(default_factory=AdamConfig)
    hidden: int = Field(default=128, ge=1)
    code_dim: int = Field(default=8, ge=1)
    n_shape: int = Field(default=10, ge=1)
    n_time: int = Field(default=10, ge=1)
    proposal_hidden: int = Field(default=128, ge=1)
    mu_quality: float = Field(default=20.0, gt=0.0)
    kernel_cost: CostKind = "half_gaussian"
    normalize_kernel: bool = True
    predictor_epochs: int = Field(default=300, ge=0)
    proposal_epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=50, ge=1)
    patience: int = Field(default=50, ge=1)
    seed: int = 0


class DatasetSource(StrictModel):
    """Either a cache written by `gen` (sidecar JSON path or its directory) or a univariate CSV file."""

    path: str
    context: int = Field(default=20, ge=1)
    horizon: int = Field(default=20, ge=1)
    stride: int = Field(default=1, ge=1)
    normalization: Literal["none", "zscore", "minmax"] = "zscore"


class GenExperiment(StrictModel):
    dataset: DatasetName
    seed: int = 0
    out_dir: str


class TrainExperiment(StrictModel):
    dataset: DatasetSource
    train: TrainConfig = Field(default_factory=TrainConfig)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    out_dir: str


class EvalExperiment(StrictModel):
    checkpoints: list[str] = Field(min_length=1)
    baseline_checkpoints: list[str] = Field(default_factory=list)
    dataset: DatasetSource
    metrics: list[MetricName] = Field(default_factory=lambda: ["mse", "dtw", "tdi", "ramp", "hausdorff"], min_length=1)
    changepoint: Literal["step", "peaks"] = "step"
    peak_threshold: float = 0.5
    peak_min_distance: int = Field(default=3, ge=1)
    ramp_epsilon: float | None = Field(default=None, gt=0.0)
    noise_free: bool = False
    dilate: DilateConfig = Field(default_factory=DilateConfig)
    out_dir: str


class SweepExperiment(StrictModel):
    parameter: Literal["alpha", "gamma"]
    grid: list[float] = Field(min_length=1)
    base: TrainExperiment

    @field_validator("grid")
    @classmethod
    def _finite_grid(cls, v: list[float]) -> list[float]:
        if any(x != x for x in v):
            raise ValueError("grid values must be numbers")
        return v


class BenchExperiment(StrictModel):
    lengths: list[int] = Field(default_factory=lambda: [20, 40, 80], min_length=1)
    repeats: int = Field(default=3, ge=1)
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    gamma: float = Field(default=1e-2, gt=0.0)
    seed: int = 0
    out_dir: str

    @field_validator("lengths")
    @classmethod
    def _positive_lengths(cls, v: list[int]) -> list[int]:
        if any(x < 1 for x in v):
            raise ValueError("lengths must be positive")
        return v


class StripeExperiment(StrictModel):
    dataset: DatasetSource
    stripe: StripeConfig = Field(default_factory=StripeConfig)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    out_dir: str


class StripeEvalExperiment(StrictModel):
    checkpoints: list[str] = Field(min_length=1)
    dataset: DatasetSource
    out_dir: str
    scatter: bool = True


class MetricRow(StrictModel):
    metric: str
    mean: float
    std: float
    n_seeds: int
    config_hash: str


class EpochRecord(StrictModel):
    epoch: int
    train_loss: float
    valid_loss: float
    best_valid: float
    phase: str = "train"


class DatasetSidecar(StrictModel):
    name: str
    kind: str
    seed: int
    generator_version: str
    arrays: dict[str, list[int]]


class CheckpointSidecar(StrictModel):
    architecture: dict[str, Any]
    config: dict[str, Any]
    seed: int
    epoch: int
    layout: list[tuple[str, list[int]]]


class ManifestEntry(StrictModel):
    path: str
    sha256: str


class Manifest(StrictModel):
    command: str
    config_hash: str
    files: list[ManifestEntry]


def config_hash(config: BaseModel) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
