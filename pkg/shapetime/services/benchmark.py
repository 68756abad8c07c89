from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from shapetime.alignment import cost_matrix_batch, naive_alignment_fd, soft_dtw_tables
from shapetime.domain.schemas import BenchExperiment, DilateConfig, config_hash
from shapetime.infrastructure.storage import write_manifest
from shapetime.losses import dilate_batch
from shapetime.services.reporting import write_csv, write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRow:
    length: int
    custom_seconds: float
    dilate_seconds: float
    naive_seconds: float
    speedup: float
    growth: float | None


def _best_time(fn: Callable[[], object], repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_benchmark(exp: BenchExperiment) -> list[BenchRow]:
    """Wall time of the DP forward+backward against finite differences over the cost entries, per length."""
    rng = np.random.default_rng(exp.seed)
    cfg = DilateConfig(alpha=exp.alpha, gamma=exp.gamma)
    rows: list[BenchRow] = []
    previous: float | None = None

    for length in exp.lengths:
        y_pred = rng.standard_normal((1, length, 1))
        y_true = rng.standard_normal((1, length, 1))
        delta = cost_matrix_batch(y_pred, y_true)

        custom = _best_time(lambda: soft_dtw_tables(delta, exp.gamma).alignment, exp.repeats)
        full = _best_time(lambda: dilate_batch(y_pred, y_true, cfg, need_grad=True), exp.repeats)
        naive = _best_time(lambda: naive_alignment_fd(delta[0], exp.gamma), exp.repeats)

        row = BenchRow(
            length=int(length),
            custom_seconds=custom,
            dilate_seconds=full,
            naive_seconds=naive,
            speedup=naive / custom,
            growth=None if previous is None else custom / previous,
        )
        rows.append(row)
        previous = custom
        logger.info("bench_length", extra=asdict(row))
    return rows


def write_benchmark(exp: BenchExperiment, rows: list[BenchRow]) -> list[Path]:
    out = Path(exp.out_dir)
    digest = config_hash(exp)
    written = [
        write_json(out / "bench.json", {"config_hash": digest, "rows": [asdict(r) for r in rows]}),
        write_csv(
            out / "bench.csv",
            ["length", "custom_seconds", "dilate_seconds", "naive_seconds", "speedup", "growth"],
            ([r.length, r.custom_seconds, r.dilate_seconds, r.naive_seconds, r.speedup, r.growth] for r in rows),
        ),
    ]
    write_manifest(out, command="bench", config_hash=digest)
    return written
