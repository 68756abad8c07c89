from __future__ import annotations

import argparse
import asyncio
import json
import logging
import uuid
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import torch
from pydantic import BaseModel, ValidationError

from shapetime.core.config import Settings, get_settings
from shapetime.core.context import command_ctx_var, run_id_ctx_var
from shapetime.core.errors import EXIT_RUNTIME_FAILURE, EXIT_USAGE, AppError, ConfigError, UsageError
from shapetime.core.logging import setup_logging
from shapetime.domain.schemas import (
    BenchExperiment,
    EvalExperiment,
    GenExperiment,
    StripeEvalExperiment,
    StripeExperiment,
    SweepExperiment,
    TrainExperiment,
)
from shapetime.infrastructure.storage import FileCheckpointStore
from shapetime.services.benchmark import run_benchmark, write_benchmark
from shapetime.services.experiment_service import ExperimentService, ExperimentServiceConfig
from shapetime.services.stripe_service import StripeService

logger = logging.getLogger(__name__)

COMMANDS = ("gen", "train", "eval", "sweep", "bench", "stripe-train", "stripe-eval")


def _int_list(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer or a comma separated list, got {raw!r}") from exc


def _float_list(raw: str) -> list[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {raw!r}") from exc


def _str_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapetime", description="Shape and time aware forecasting experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON experiment config; flags override its values")
        p.add_argument("--out", help="output directory")
        return p

    gen = command("gen", "generate a synthetic dataset cache")
    gen.add_argument("dataset_name", nargs="?", help="synthetic-det or synthetic-prob")
    gen.add_argument("--dataset")
    gen.add_argument("--seed", type=_int_list)

    for name, help_text in (("train", "train deterministic forecasters"), ("stripe-train", "train STRIPE models")):
        p = command(name, help_text)
        p.add_argument("--dataset", help="dataset cache (sidecar or directory) or CSV file")
        p.add_argument("--seed", type=_int_list)
        p.add_argument("--alpha", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--epochs", type=int)
        if name == "train":
            p.add_argument("--loss")

    for name, help_text in (("eval", "score deterministic checkpoints"), ("stripe-eval", "score STRIPE checkpoints")):
        p = command(name, help_text)
        p.add_argument("--checkpoint", action="append", help="checkpoint prefix; repeat for several seeds")
        p.add_argument("--dataset")
        if name == "eval":
            p.add_argument("--metrics", type=_str_list)
            p.add_argument("--noise-free", action="store_true", default=None)

    sweep = command("sweep", "train and score over a grid of alpha or gamma")
    sweep.add_argument("--parameter")
    sweep.add_argument("--grid", type=_float_list)
    sweep.add_argument("--dataset")
    sweep.add_argument("--seed", type=_int_list)
    sweep.add_argument("--loss")
    sweep.add_argument("--alpha", type=float)
    sweep.add_argument("--gamma", type=float)
    sweep.add_argument("--epochs", type=int)

    bench = command("bench", "time the DP backward against finite differences")
    bench.add_argument("--lengths", type=_int_list)
    bench.add_argument("--repeats", type=int)
    bench.add_argument("--seed", type=_int_list)
    bench.add_argument("--alpha", type=float)
    bench.add_argument("--gamma", type=float)
    return parser


def _load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return raw


def _set(target: dict[str, Any], keys: Sequence[str], value: Any) -> None:
    if value is None:
        return
    for key in keys[:-1]:
        target = target.setdefault(key, {})
    target[keys[-1]] = value


def _default(target: dict[str, Any], keys: Sequence[str], value: Any) -> None:
    for key in keys[:-1]:
        target = target.setdefault(key, {})
    target.setdefault(keys[-1], value)


def _single_seed(seeds: list[int] | None) -> int | None:
    if seeds is None:
        return None
    if len(seeds) != 1:
        raise UsageError("this command takes a single seed")
    return seeds[0]


def _training_overrides(cfg: dict[str, Any], args: argparse.Namespace, section: str, settings: Settings) -> None:
    if args.dataset:
        _set(cfg, ["dataset", "path"], args.dataset)
    _set(cfg, ["seeds"], args.seed)
    _set(cfg, [section, "dilate", "alpha"], args.alpha)
    _set(cfg, [section, "dilate", "gamma"], args.gamma)
    _default(cfg, [section, "dilate", "alpha"], settings.default_alpha)
    _default(cfg, [section, "dilate", "gamma"], settings.default_gamma)
    if section == "train":
        _set(cfg, ["train", "loss"], getattr(args, "loss", None))
        _set(cfg, ["train", "epochs"], args.epochs)
    elif args.epochs is not None:
        _set(cfg, ["stripe", "predictor_epochs"], args.epochs)
        _set(cfg, ["stripe", "proposal_epochs"], args.epochs)


def build_experiment(args: argparse.Namespace, settings: Settings) -> BaseModel:
    """Config file, then flags, then settings defaults; validated before any compute."""
    cfg = _load_config(args.config)
    name = args.command
    default_out = str(Path(settings.out_dir) / name)

    if name == "gen":
        _set(cfg, ["dataset"], args.dataset or args.dataset_name)
        _set(cfg, ["seed"], _single_seed(args.seed))
        _set(cfg, ["out_dir"], args.out)
        _default(cfg, ["out_dir"], default_out)
        return GenExperiment.model_validate(cfg)

    if name in ("train", "stripe-train"):
        section = "train" if name == "train" else "stripe"
        _training_overrides(cfg, args, section, settings)
        _set(cfg, ["out_dir"], args.out)
        _default(cfg, ["out_dir"], default_out)
        model = TrainExperiment if name == "train" else StripeExperiment
        return model.model_validate(cfg)

    if name in ("eval", "stripe-eval"):
        _set(cfg, ["checkpoints"], args.checkpoint)
        if args.dataset:
            _set(cfg, ["dataset", "path"], args.dataset)
        if name == "eval":
            _set(cfg, ["metrics"], args.metrics)
            _set(cfg, ["noise_free"], args.noise_free)
        _set(cfg, ["out_dir"], args.out)
        _default(cfg, ["out_dir"], default_out)
        model = EvalExperiment if name == "eval" else StripeEvalExperiment
        return model.model_validate(cfg)

    if name == "sweep":
        _set(cfg, ["parameter"], args.parameter)
        _set(cfg, ["grid"], args.grid)
        base = cfg.setdefault("base", {})
        _training_overrides(base, args, "train", settings)
        _set(base, ["out_dir"], args.out)
        _default(base, ["out_dir"], default_out)
        return SweepExperiment.model_validate(cfg)

    _set(cfg, ["lengths"], args.lengths)
    _set(cfg, ["repeats"], args.repeats)
    _set(cfg, ["seed"], _single_seed(args.seed))
    _set(cfg, ["alpha"], args.alpha)
    _set(cfg, ["gamma"], args.gamma)
    _default(cfg, ["alpha"], settings.default_alpha)
    _default(cfg, ["gamma"], settings.default_gamma)
    _set(cfg, ["out_dir"], args.out)
    _default(cfg, ["out_dir"], default_out)
    return BenchExperiment.model_validate(cfg)


async def run_command(name: str, exp: BaseModel, settings: Settings) -> None:
    service_cfg = ExperimentServiceConfig(threads=settings.threads, quality_floor=settings.quality_floor)
    store = FileCheckpointStore()
    experiments = ExperimentService(config=service_cfg, checkpoints=store)
    stripe = StripeService(config=service_cfg, checkpoints=store)

    if name == "gen":
        await experiments.gen(exp)  # type: ignore[arg-type]
    elif name == "train":
        await experiments.train(exp)  # type: ignore[arg-type]
    elif name == "eval":
        await experiments.evaluate(exp)  # type: ignore[arg-type]
    elif name == "sweep":
        await experiments.sweep(exp)  # type: ignore[arg-type]
    elif name == "stripe-train":
        await stripe.train(exp)  # type: ignore[arg-type]
    elif name == "stripe-eval":
        await stripe.evaluate(exp)  # type: ignore[arg-type]
    else:
        rows = await asyncio.to_thread(run_benchmark, exp)  # type: ignore[arg-type]
        write_benchmark(exp, rows)  # type: ignore[arg-type]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except ValidationError as exc:
        logging.basicConfig()
        logger.error("settings_invalid", extra={"errors": exc.error_count()})
        return EXIT_USAGE
    setup_logging(settings)
    torch.set_num_threads(settings.threads)
    run_id_ctx_var.set(uuid.uuid4().hex[:12])
    command_ctx_var.set(args.command)

    try:
        exp = build_experiment(args, settings)
        logger.info("command_start", extra={"config": exp.model_dump(mode="json")})
        asyncio.run(run_command(args.command, exp, settings))
    except ValidationError as exc:
        logger.error("config_invalid", extra={"errors": exc.errors(include_url=False, include_input=False)})
        return EXIT_USAGE
    except AppError as exc:
        logger.error("app_error", extra={"code": exc.code, "detail": str(exc), **(exc.extra or {})})
        return exc.exit_code
    except Exception:  # noqa: BLE001
        logger.exception("unhandled_exception")
        return EXIT_RUNTIME_FAILURE

    logger.info("command_complete")
    return 0
