from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from pathlib import Path

import pytest

from shapetime.cli import build_experiment, build_parser, main
from shapetime.core.config import get_settings
from shapetime.core.errors import UsageError
from shapetime.data import SyntheticConfig, gen_synthetic_det
from shapetime.domain.schemas import BenchExperiment, SweepExperiment, TrainExperiment
from shapetime.infrastructure.storage import FileDatasetStore


@pytest.fixture(autouse=True)
def _restore_root_logging() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def tiny_cache(tmp_path: Path, tiny_synthetic: SyntheticConfig) -> Path:
    FileDatasetStore(tmp_path / "cache").save("det", gen_synthetic_det(0, tiny_synthetic), kind="synthetic-det")
    return tmp_path / "cache" / "det.json"


def _manifest_hashes(out: Path) -> dict[str, str]:
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    return {e["path"]: e["sha256"] for e in manifest["files"]}


def test_gen_is_reproducible(tmp_path: Path) -> None:
    assert main(["gen", "synthetic-det", "--seed", "3", "--out", str(tmp_path / "a")]) == 0
    assert main(["gen", "--dataset", "synthetic-det", "--seed", "3", "--out", str(tmp_path / "b")]) == 0
    first = _manifest_hashes(tmp_path / "a")
    assert first == _manifest_hashes(tmp_path / "b")
    assert "synthetic-det.json" in first


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "synthetic-weather"],
        ["gen", "synthetic-det", "--seed", "1,2"],
        ["train", "--dataset", "missing/cache.json"],
        ["sweep", "--parameter", "alpha", "--grid", "", "--dataset", "x.csv"],
        ["sweep", "--parameter", "beta", "--grid", "0.5", "--dataset", "x.csv"],
        ["bench", "--repeats", "0"],
        ["bench", "--lengths", "0,4"],
        ["train", "--dataset", "x.csv", "--alpha", "1.5"],
    ],
)
def test_usage_errors_exit_with_two(argv: list[str], tmp_path: Path) -> None:
    assert main([*argv, "--out", str(tmp_path / "out")]) == 2


def test_unreadable_config_exits_with_two(tmp_path: Path) -> None:
    config = tmp_path / "bad.json"
    config.write_text("[1, 2", encoding="utf-8")
    assert main(["bench", "--config", str(config), "--out", str(tmp_path / "out")]) == 2
    config.write_text("[1, 2]", encoding="utf-8")
    assert main(["bench", "--config", str(config), "--out", str(tmp_path / "out")]) == 2


def test_invalid_settings_exit_with_two(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv("THREADS", "0")
    get_settings.cache_clear()
    assert main(["bench", "--out", str(tmp_path)]) == 2


def test_flags_override_config_and_settings_fill_defaults(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("DEFAULT_GAMMA", "0.25")
    get_settings.cache_clear()
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"train": {"epochs": 7, "hidden": 16, "dilate": {"alpha": 0.2}}}), encoding="utf-8")

    args = build_parser().parse_args(["train", "--config", str(config), "--dataset", "d.csv", "--epochs", "3"])
    exp = build_experiment(args, get_settings())
    assert isinstance(exp, TrainExperiment)
    assert exp.train.epochs == 3
    assert exp.train.hidden == 16
    assert exp.train.dilate.alpha == 0.2
    assert exp.train.dilate.gamma == 0.25
    assert exp.out_dir == str(Path("runs") / "train")


def test_sweep_flags_land_in_the_base_experiment() -> None:
    args = build_parser().parse_args(
        ["sweep", "--parameter", "gamma", "--grid", "0.01,0.1", "--dataset", "d.csv", "--seed", "0,1", "--loss", "mse"]
    )
    exp = build_experiment(args, get_settings())
    assert isinstance(exp, SweepExperiment)
    assert exp.grid == [0.01, 0.1]
    assert exp.base.seeds == [0, 1]
    assert exp.base.train.loss == "mse"


def test_bench_single_seed_only() -> None:
    args = build_parser().parse_args(["bench", "--seed", "1,2"])
    with pytest.raises(UsageError):
        build_experiment(args, get_settings())
    exp = build_experiment(build_parser().parse_args(["bench", "--lengths", "4,8"]), get_settings())
    assert isinstance(exp, BenchExperiment)
    assert exp.lengths == [4, 8]


def test_bench_writes_its_tables(out_dir: Path) -> None:
    assert main(["bench", "--lengths", "4,8", "--repeats", "1", "--out", str(out_dir)]) == 0
    payload = json.loads((out_dir / "bench.json").read_text(encoding="utf-8"))
    assert [row["length"] for row in payload["rows"]] == [4, 8]
    assert payload["rows"][0]["growth"] is None
    assert payload["rows"][1]["growth"] > 0.0
    assert set(_manifest_hashes(out_dir)) == {"bench.json", "bench.csv"}


def test_train_then_eval_from_the_command_line(tiny_cache: Path, tmp_path: Path) -> None:
    config = tmp_path / "train.json"
    config.write_text(json.dumps({"train": {"hidden": 8, "batch_size": 8}}), encoding="utf-8")
    train_out = tmp_path / "train"
    argv = ["train", "--config", str(config), "--dataset", str(tiny_cache), "--loss", "mse", "--epochs", "1"]
    assert main([*argv, "--seed", "0,1", "--out", str(train_out)]) == 0

    eval_out = tmp_path / "eval"
    checkpoints = ["--checkpoint", str(train_out / "seed_0" / "model"), "--checkpoint", str(train_out / "seed_1" / "model")]
    argv = ["eval", *checkpoints, "--dataset", str(tiny_cache), "--metrics", "mse,dtw", "--out", str(eval_out)]
    assert main(argv) == 0
    rows = json.loads((eval_out / "metrics.json").read_text(encoding="utf-8"))["raw"]
    assert [(r["metric"], r["n_seeds"]) for r in rows] == [("mse", 2), ("dtw", 2)]

    assert main(["stripe-eval", *checkpoints, "--dataset", str(tiny_cache), "--out", str(tmp_path / "x")]) == 2
    assert main(["eval", "--checkpoint", str(tmp_path / "nope"), "--dataset", str(tiny_cache), "--out", str(tmp_path / "y")]) == 2
