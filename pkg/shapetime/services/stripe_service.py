from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import torch

from shapetime.core.errors import UsageError
from shapetime.domain.entities import SplitTriple
from shapetime.domain.ports.stores import CheckpointStore
from shapetime.domain.schemas import (
    CheckpointSidecar,
    DilateConfig,
    EpochRecord,
    MetricRow,
    StripeConfig,
    StripeEvalExperiment,
    StripeExperiment,
    config_hash,
)
from shapetime.forecast import (
    StripeModel,
    build_stripe,
    sample_futures,
    sample_prior_futures,
    train_stripe_predictor,
    train_stripe_proposals,
)
from shapetime.forecast.training import to_tensor
from shapetime.infrastructure.storage import parameter_layout, write_manifest
from shapetime.metrics import best_sample, crps_ensemble, cross_loss_matrix, h_measures, mean_sample, metric_fn
from shapetime.services.datasets import load_dataset
from shapetime.services.experiment_service import ExperimentServiceConfig, load_model
from shapetime.services.parallel import fan_out_seeds
from shapetime.services.reporting import summarize_all, write_csv, write_json, write_jsonl, write_metric_table

logger = logging.getLogger(__name__)

QUALITY_LOSSES = ("dtw", "tdi", "dilate")
SAMPLERS = ("proposals", "prior")


@dataclass(frozen=True)
class SamplerScores:
    metrics: dict[str, float]
    scatter: list[list[Any]]


def _score_sets(
    sampler: str,
    seed: int,
    predictions: np.ndarray,
    futures: np.ndarray,
    dilate: DilateConfig,
) -> SamplerScores:
    """predictions (B, N, tau, d) against futures (B, F, tau, d): H-measures per loss and CRPS.

    With a single future per input the best-of-N and mean-of-N sample losses are reported instead.
    """
    losses = {name: metric_fn(name, dilate) for name in QUALITY_LOSSES}
    acc: dict[str, list[float]] = {}
    scatter: list[list[Any]] = []

    for b in range(predictions.shape[0]):
        preds, fut = predictions[b], futures[b]
        closest: dict[str, np.ndarray] = {}
        for name, loss in losses.items():
            cross = cross_loss_matrix(preds, fut, loss)
            closest[name] = cross.min(axis=1)
            if fut.shape[0] > 1:
                hq, hd, f1 = h_measures(cross)
                acc.setdefault(f"{sampler}:h_quality:{name}", []).append(hq)
                acc.setdefault(f"{sampler}:h_diversity:{name}", []).append(hd)
                acc.setdefault(f"{sampler}:f1:{name}", []).append(f1)
            else:
                acc.setdefault(f"{sampler}:best_sample:{name}", []).append(best_sample(preds, fut[0], loss))
                acc.setdefault(f"{sampler}:mean_sample:{name}", []).append(mean_sample(preds, fut[0], loss))
        crps = float(np.mean([crps_ensemble(preds, f) for f in fut]))
        acc.setdefault(f"{sampler}:crps", []).append(crps)
        for i in range(preds.shape[0]):
            scatter.append([sampler, seed, b, i, *(float(closest[n][i]) for n in QUALITY_LOSSES)])

    return SamplerScores(metrics={k: float(np.mean(v)) for k, v in acc.items()}, scatter=scatter)


def _futures(split_targets: np.ndarray) -> np.ndarray:
    return split_targets if split_targets.ndim == 4 else split_targets[:, None]


class StripeService:
    """stripe-train (predictor, then proposal networks) and stripe-eval (proposals against the prior baseline)."""

    def __init__(self, *, config: ExperimentServiceConfig, checkpoints: CheckpointStore) -> None:
        self._cfg = config
        self._checkpoints = checkpoints

    async def train(self, exp: StripeExperiment) -> list[Path]:
        data = load_dataset(exp.dataset)
        digest = config_hash(exp)
        out = Path(exp.out_dir)

        def run(seed: int) -> Path:
            return self._train_seed(data, exp.stripe.model_copy(update={"seed": seed}), out / f"seed_{seed}", digest)

        paths = await fan_out_seeds(run, exp.seeds, limit=self._cfg.threads)
        write_json(out / "train.json", {"config_hash": digest, "checkpoints": [p.as_posix() for p in paths]})
        write_manifest(out, command="stripe-train", config_hash=digest)
        logger.info("stripe_train_complete", extra={"seeds": list(exp.seeds), "out_dir": str(out)})
        return paths

    def _train_seed(self, data: SplitTriple, cfg: StripeConfig, seed_dir: Path, digest: str) -> Path:
        records: list[EpochRecord] = []
        model = build_stripe(data, cfg)
        train_stripe_predictor(model, data, cfg, on_epoch=records.append)
        result = train_stripe_proposals(model, data, cfg, on_epoch=records.append, quality_floor=self._cfg.quality_floor)
        write_jsonl(seed_dir / "train_log.jsonl", records)
        sidecar = CheckpointSidecar(
            architecture=model.architecture(),
            config={**cfg.model_dump(mode="json"), "config_hash": digest},
            seed=cfg.seed,
            epoch=result.best_epoch,
            layout=parameter_layout(model),
        )
        prefix = seed_dir / "model"
        self._checkpoints.save(prefix, model, sidecar)
        return prefix

    def _score_checkpoint(self, path: str, inputs: np.ndarray, futures: np.ndarray) -> tuple[int, list[SamplerScores]]:
        model, sidecar = load_model(self._checkpoints, path)
        if not isinstance(model, StripeModel):
            raise UsageError(f"{path} is a deterministic checkpoint; use eval")
        dilate = DilateConfig.model_validate(sidecar.config.get("dilate", {}))
        x = to_tensor(inputs)
        proposals = sample_futures(model, x).numpy()
        generator = torch.Generator().manual_seed(int(sidecar.seed))
        prior = sample_prior_futures(model, x, proposals.shape[1], generator).numpy()
        return sidecar.seed, [
            _score_sets(name, sidecar.seed, preds, futures, dilate)
            for name, preds in zip(SAMPLERS, (proposals, prior), strict=True)
        ]

    async def evaluate(self, exp: StripeEvalExperiment) -> list[MetricRow]:
        data = load_dataset(exp.dataset)
        futures = _futures(data.test.targets)
        digest = config_hash(exp)
        out = Path(exp.out_dir)

        per_metric: dict[str, list[float]] = {}
        per_checkpoint: dict[str, dict[str, float]] = {}
        scatter: list[list[Any]] = []
        for path in exp.checkpoints:
            seed, scores = await asyncio.to_thread(self._score_checkpoint, path, data.test.inputs, futures)
            merged: dict[str, float] = {}
            for s in scores:
                merged.update(s.metrics)
                scatter.extend(s.scatter)
            for name, value in merged.items():
                per_metric.setdefault(name, []).append(value)
            per_checkpoint[str(path)] = {**merged, "seed": seed}

        rows = summarize_all(per_metric, digest)
        write_metric_table(out, "metrics", rows)
        write_json(out / "per_seed.json", per_checkpoint)
        if exp.scatter:
            write_csv(out / "scatter.csv", ["sampler", "seed", "input", "prediction", *QUALITY_LOSSES], scatter)
        write_manifest(out, command="stripe-eval", config_hash=digest)
        logger.info("stripe_eval_complete", extra={"checkpoints": len(exp.checkpoints), "rows": len(rows)})
        return rows
