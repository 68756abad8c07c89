from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Literal

import numpy as np

from shapetime.core.errors import DatasetError, ParameterError, ParseError
from shapetime.domain.entities import DatasetSplit, NormalizationStats, SplitTriple, WindowedDataset

logger = logging.getLogger(__name__)

SPLIT_FRACTIONS = (0.6, 0.2, 0.2)


def read_series(path: str | Path) -> np.ndarray:
    """One-column numeric text; values separated by commas or newlines; an optional header on the first line."""
    p = Path(path)
    if not p.is_file():
        raise DatasetError(f"dataset file not found: {p}")

    values: list[float] = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        for token in (t.strip() for t in line.split(",")):
            if not token:
                continue
            try:
                value = float(token)
            except ValueError:
                if lineno == 1 and not values:
                    break
                raise ParseError(f"non-numeric value {token!r} on line {lineno}", line=lineno) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {token!r} on line {lineno}", line=lineno)
            values.append(value)
    return np.asarray(values, dtype=np.float64)


def _stats(train: np.ndarray, method: Literal["none", "zscore", "minmax"]) -> NormalizationStats:
    if method == "none":
        return NormalizationStats(method=method, shift=0.0, scale=1.0)
    if method == "zscore":
        std = float(train.std())
        return NormalizationStats(method=method, shift=float(train.mean()), scale=std if std > 0 else 1.0)
    if method == "minmax":
        span = float(train.max() - train.min())
        return NormalizationStats(method=method, shift=float(train.min()), scale=span if span > 0 else 1.0)
    raise ParameterError(f"unknown normalization {method!r}")


def window_count(length: int, window: int, stride: int) -> int:
    return 0 if length < window else (length - window) // stride + 1


def _windows(part: np.ndarray, offset: int, context: int, horizon: int, stride: int, split: str) -> DatasetSplit:
    window = context + horizon
    count = window_count(part.size, window, stride)
    starts = np.arange(count) * stride
    idx = starts[:, None] + np.arange(window)[None, :]
    chunks = part[idx]
    return DatasetSplit(
        split=split,  # type: ignore[arg-type]
        inputs=chunks[:, :context, None],
        targets=chunks[:, context:, None],
        seed=0,
        meta={"start": (starts + offset).astype(np.float64)},
    )


def load_csv_windows(
    path: str | Path,
    context_T: int,
    horizon_tau: int,
    stride: int = 1,
    normalization: Literal["none", "zscore", "minmax"] = "zscore",
) -> WindowedDataset:
    if context_T < 1 or horizon_tau < 1 or stride < 1:
        raise ParameterError("context, horizon and stride must be >= 1")
    series = read_series(path)
    window = context_T + horizon_tau

    n = series.size
    n_train = int(n * SPLIT_FRACTIONS[0])
    n_valid = int(n * SPLIT_FRACTIONS[1])
    bounds = ((0, n_train), (n_train, n_train + n_valid), (n_train + n_valid, n))
    if any(hi - lo < window for lo, hi in bounds):
        raise DatasetError(f"series of {n} rows is too short for windows of {window} in a 60/20/20 split")

    stats = _stats(series[:n_train], normalization)
    normed = stats.apply(series)
    splits = SplitTriple(
        *(
            _windows(normed[lo:hi], lo, context_T, horizon_tau, stride, name)
            for (lo, hi), name in zip(bounds, ("train", "valid", "test"), strict=True)
        )
    )
    total = window_count(n, window, stride)
    logger.info(
        "csv_windows_loaded",
        extra={"path": str(path), "rows": n, "windows_total": total, "sizes": [len(s) for s in splits]},
    )
    return WindowedDataset(splits=splits, normalization=stats, n_windows_total=total)
