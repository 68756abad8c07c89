from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from shapetime.core.errors import DatasetError
from shapetime.data import load_csv_windows
from shapetime.domain.entities import DatasetSplit, SplitTriple
from shapetime.domain.schemas import DatasetSource
from shapetime.infrastructure.storage import FileDatasetStore

logger = logging.getLogger(__name__)


def load_dataset(source: DatasetSource) -> SplitTriple:
    """A `gen` cache (sidecar JSON or its directory) or a univariate CSV windowed per `source`."""
    path = Path(source.path)
    if not path.exists():
        raise DatasetError(f"dataset path {path} does not exist")
    if path.suffix.lower() in (".csv", ".txt"):
        windows = load_csv_windows(
            path,
            source.context,
            source.horizon,
            stride=source.stride,
            normalization=source.normalization,
        )
        return windows.splits
    root = path.parent if path.is_file() else path
    return FileDatasetStore(root).load(path)


def evaluation_pairs(split: DatasetSplit, *, noise_free: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(inputs, targets) with one row per future; noise_free subtracts the stored target noise."""
    targets = split.targets
    if noise_free:
        noise = split.meta.get("target_noise")
        if noise is None or noise.shape != targets.shape:
            raise DatasetError("noise-free evaluation needs a synthetic dataset with stored target noise")
        targets = targets - noise
    if not split.multi_future:
        return split.inputs, targets
    k = int(targets.shape[1])
    return np.repeat(split.inputs, k, axis=0), targets.reshape(-1, *targets.shape[2:])
