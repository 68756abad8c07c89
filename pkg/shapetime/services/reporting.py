from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from shapetime.domain.schemas import MetricRow
from shapetime.metrics import compare_samples

# readability multipliers for printed tables; raw values are always written too
METRIC_SCALE: dict[str, float] = {
    "mse": 1000.0,
    "dtw": 100.0,
    "tdi": 100.0,
    "dilate": 100.0,
    "crps": 1000.0,
}


def summarize(metric: str, per_seed: Sequence[float], config_hash: str) -> MetricRow:
    values = np.asarray(per_seed, dtype=np.float64)
    return MetricRow(
        metric=metric,
        mean=float(values.mean()),
        std=float(values.std()),
        n_seeds=int(values.size),
        config_hash=config_hash,
    )


def summarize_all(per_seed: Mapping[str, Sequence[float]], config_hash: str) -> list[MetricRow]:
    return [summarize(name, values, config_hash) for name, values in per_seed.items()]


def scale_for(metric: str) -> float:
    return METRIC_SCALE.get(metric.split(":")[-1], 1.0)


def scaled(row: MetricRow) -> MetricRow:
    factor = scale_for(row.metric)
    return row.model_copy(update={"mean": row.mean * factor, "std": row.std * factor})


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def write_jsonl(path: Path, records: Iterable[BaseModel]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.model_dump_json() + "\n")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_metric_table(out_dir: Path, stem: str, rows: Sequence[MetricRow]) -> list[Path]:
    """`<stem>.json` with raw and scaled rows and a `<stem>.csv` carrying both side by side."""
    payload = {
        "raw": [r.model_dump(mode="json") for r in rows],
        "scaled": [scaled(r).model_dump(mode="json") for r in rows],
    }
    json_path = write_json(out_dir / f"{stem}.json", payload)
    csv_path = write_csv(
        out_dir / f"{stem}.csv",
        ["metric", "mean", "std", "scale", "scaled_mean", "scaled_std", "n_seeds", "config_hash"],
        (
            [r.metric, r.mean, r.std, scale_for(r.metric), s.mean, s.std, r.n_seeds, r.config_hash]
            for r, s in ((r, scaled(r)) for r in rows)
        ),
    )
    return [json_path, csv_path]


def _finite_or_none(value: float) -> float | None:
    return value if np.isfinite(value) else None


def comparison_table(
    runs: Mapping[str, Sequence[float]],
    baseline: Mapping[str, Sequence[float]],
) -> list[dict[str, Any]]:
    """Welch test per metric between per-seed samples of a run and a baseline run."""
    rows = []
    for metric, values in runs.items():
        if metric not in baseline:
            continue
        cmp = compare_samples(np.asarray(values), np.asarray(baseline[metric]))
        rows.append(
            {
                "metric": metric,
                "mean": float(np.mean(values)),
                "baseline_mean": float(np.mean(baseline[metric])),
                "statistic": _finite_or_none(cmp.statistic),
                "p_value": _finite_or_none(cmp.p_value),
                "significant": cmp.significant,
            }
        )
    return rows
