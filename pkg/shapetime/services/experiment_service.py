from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from torch import nn

from shapetime.core.errors import CheckpointError, UsageError
from shapetime.data import gen_synthetic_det, gen_synthetic_prob
from shapetime.domain.entities import ChangePointSet, SplitTriple
from shapetime.domain.ports.stores import CheckpointStore
from shapetime.domain.schemas import (
    CheckpointSidecar,
    DilateConfig,
    EpochRecord,
    EvalExperiment,
    GenExperiment,
    MetricRow,
    SweepExperiment,
    TrainConfig,
    TrainExperiment,
    config_hash,
)
from shapetime.forecast import MlpForecaster, StripeModel, predict, train_deterministic
from shapetime.infrastructure.storage import FileDatasetStore, parameter_layout, write_manifest
from shapetime.metrics import detect_peaks, detect_step_changepoint, hausdorff, metric_fn, ramp_score
from shapetime.services.datasets import evaluation_pairs, load_dataset
from shapetime.services.parallel import fan_out_seeds
from shapetime.services.reporting import (
    comparison_table,
    summarize_all,
    write_csv,
    write_json,
    write_jsonl,
    write_metric_table,
)

logger = logging.getLogger(__name__)

_GENERATORS: dict[str, Callable[[int], SplitTriple]] = {
    "synthetic-det": gen_synthetic_det,
    "synthetic-prob": gen_synthetic_prob,
}

SWEEP_METRICS = ("mse", "dtw", "tdi", "soft_dtw", "dilate")


@dataclass(frozen=True)
class ExperimentServiceConfig:
    threads: int
    quality_floor: float


@dataclass(frozen=True)
class ScoringOptions:
    metrics: tuple[str, ...]
    dilate: DilateConfig
    changepoint: str = "step"
    peak_threshold: float = 0.5
    peak_min_distance: int = 3
    ramp_epsilon: float | None = None

    @classmethod
    def from_eval(cls, exp: EvalExperiment) -> "ScoringOptions":
        return cls(
            metrics=tuple(exp.metrics),
            dilate=exp.dilate,
            changepoint=exp.changepoint,
            peak_threshold=exp.peak_threshold,
            peak_min_distance=exp.peak_min_distance,
            ramp_epsilon=exp.ramp_epsilon,
        )


def _changepoints(series: np.ndarray, opts: ScoringOptions) -> ChangePointSet:
    if opts.changepoint == "peaks":
        return detect_peaks(series, opts.peak_threshold, opts.peak_min_distance)
    return detect_step_changepoint(series)


def score_predictions(preds: np.ndarray, targets: np.ndarray, opts: ScoringOptions) -> dict[str, np.ndarray]:
    """Per-sample values of every requested metric."""
    out: dict[str, np.ndarray] = {}
    for name in opts.metrics:
        if name == "ramp":
            out[name] = np.array([ramp_score(p, t, opts.ramp_epsilon) for p, t in zip(preds, targets, strict=True)])
        elif name == "hausdorff":
            out[name] = np.array(
                [hausdorff(_changepoints(t, opts), _changepoints(p, opts)) for p, t in zip(preds, targets, strict=True)]
            )
        else:
            out[name] = np.asarray(metric_fn(name, opts.dilate)(preds, targets), dtype=np.float64)
    return out


def load_model(store: CheckpointStore, path: str | Path) -> tuple[nn.Module, CheckpointSidecar]:
    sidecar = store.read_sidecar(path)
    kind = sidecar.architecture.get("kind")
    model: nn.Module
    if kind == "mlp":
        model = MlpForecaster.from_architecture(sidecar.architecture)
    elif kind == "stripe":
        model = StripeModel.from_architecture(sidecar.architecture)
    else:
        raise CheckpointError(f"unknown architecture kind {kind!r} in {path}")
    store.load_into(path, model)
    model.eval()
    return model, sidecar


class ExperimentService:
    """gen, train, eval and sweep; every command writes a manifest.json into its output directory."""

    def __init__(self, *, config: ExperimentServiceConfig, checkpoints: CheckpointStore) -> None:
        self._cfg = config
        self._checkpoints = checkpoints

    async def gen(self, exp: GenExperiment) -> list[Path]:
        generator = _GENERATORS[exp.dataset]
        triple = await asyncio.to_thread(generator, exp.seed)
        out = Path(exp.out_dir)
        written = FileDatasetStore(out).save(exp.dataset, triple, kind=exp.dataset)
        write_manifest(out, command="gen", config_hash=config_hash(exp))
        return written

    async def train(self, exp: TrainExperiment) -> list[Path]:
        data = load_dataset(exp.dataset)
        digest = config_hash(exp)
        out = Path(exp.out_dir)

        def run(seed: int) -> Path:
            return self._train_seed(data, exp.train.model_copy(update={"seed": seed}), out / f"seed_{seed}", digest)

        paths = await fan_out_seeds(run, exp.seeds, limit=self._cfg.threads)
        write_json(out / "train.json", {"config_hash": digest, "checkpoints": [p.as_posix() for p in paths]})
        write_manifest(out, command="train", config_hash=digest)
        logger.info("train_complete", extra={"seeds": list(exp.seeds), "out_dir": str(out)})
        return paths

    def _train_seed(self, data: SplitTriple, cfg: TrainConfig, seed_dir: Path, digest: str) -> Path:
        records: list[EpochRecord] = []
        result = train_deterministic(data, cfg, on_epoch=records.append)
        write_jsonl(seed_dir / "train_log.jsonl", records)
        sidecar = CheckpointSidecar(
            architecture=result.model.architecture(),
            config={**cfg.model_dump(mode="json"), "config_hash": digest},
            seed=cfg.seed,
            epoch=result.best_epoch,
            layout=parameter_layout(result.model),
        )
        prefix = seed_dir / "model"
        self._checkpoints.save(prefix, result.model, sidecar)
        return prefix

    def _score_checkpoints(
        self,
        paths: Sequence[str | Path],
        inputs: np.ndarray,
        targets: np.ndarray,
        opts: ScoringOptions,
    ) -> tuple[dict[str, list[float]], dict[str, dict[str, float | int]]]:
        per_metric: dict[str, list[float]] = {name: [] for name in opts.metrics}
        per_checkpoint: dict[str, dict[str, float | int]] = {}
        for path in paths:
            model, sidecar = load_model(self._checkpoints, path)
            if not isinstance(model, MlpForecaster):
                raise UsageError(f"{path} is a probabilistic checkpoint; use stripe-eval")
            scores = score_predictions(predict(model, inputs), targets, opts)
            means = {name: float(values.mean()) for name, values in scores.items()}
            for name, value in means.items():
                per_metric[name].append(value)
            per_checkpoint[str(path)] = {**means, "seed": sidecar.seed}
        return per_metric, per_checkpoint

    async def evaluate(self, exp: EvalExperiment) -> list[MetricRow]:
        data = load_dataset(exp.dataset)
        inputs, targets = evaluation_pairs(data.test, noise_free=exp.noise_free)
        opts = ScoringOptions.from_eval(exp)
        digest = config_hash(exp)
        out = Path(exp.out_dir)

        per_metric, per_checkpoint = await asyncio.to_thread(
            self._score_checkpoints, exp.checkpoints, inputs, targets, opts
        )
        rows = summarize_all(per_metric, digest)
        write_metric_table(out, "metrics", rows)
        write_json(out / "per_seed.json", per_checkpoint)

        if exp.baseline_checkpoints:
            baseline, _ = await asyncio.to_thread(
                self._score_checkpoints, exp.baseline_checkpoints, inputs, targets, opts
            )
            write_json(out / "comparison.json", comparison_table(per_metric, baseline))

        write_manifest(out, command="eval", config_hash=digest)
        logger.info("eval_complete", extra={"checkpoints": len(exp.checkpoints), "metrics": list(exp.metrics)})
        return rows

    async def sweep(self, exp: SweepExperiment) -> list[dict[str, Any]]:
        base = exp.base
        digest = config_hash(exp)
        root = Path(base.out_dir)
        data = load_dataset(base.dataset)
        inputs, targets = evaluation_pairs(data.test)
        reference = base.train.dilate

        results: list[dict[str, Any]] = []
        for value in exp.grid:
            dilate = DilateConfig.model_validate({**reference.model_dump(), exp.parameter: value})
            train = TrainConfig.model_validate({**base.train.model_dump(), "dilate": dilate.model_dump()})
            run = base.model_copy(update={"train": train, "out_dir": str(root / f"{exp.parameter}_{value:g}")})
            paths = await self.train(run)

            per_metric, _ = await asyncio.to_thread(
                self._score_checkpoints, paths, inputs, targets, ScoringOptions(metrics=SWEEP_METRICS, dilate=dilate)
            )
            ref, _ = await asyncio.to_thread(
                self._score_checkpoints, paths, inputs, targets, ScoringOptions(metrics=("dilate",), dilate=reference)
            )
            per_metric["dilate_ref"] = ref["dilate"]
            rows = summarize_all(per_metric, digest)
            results.append({"parameter": exp.parameter, "value": value, "metrics": [r.model_dump() for r in rows]})
            logger.info("sweep_point", extra={"parameter": exp.parameter, "value": value})

        write_json(root / "sweep.json", results)
        write_csv(
            root / "sweep.csv",
            ["parameter", "value", "metric", "mean", "std", "n_seeds", "config_hash"],
            (
                [r["parameter"], r["value"], m["metric"], m["mean"], m["std"], m["n_seeds"], m["config_hash"]]
                for r in results
                for m in r["metrics"]
            ),
        )
        write_manifest(root, command="sweep", config_hash=digest)
        return results
