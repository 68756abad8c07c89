from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np


def write_f64(path: Path, values: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(values, dtype="<f8").tofile(path)
    return path


def read_f64(path: Path, shape: tuple[int, ...]) -> np.ndarray | None:
    """Row-major float64 array, or None when the file is missing or its size disagrees with shape."""
    if not path.is_file():
        return None
    expected = int(np.prod(shape, dtype=np.int64)) * 8
    if path.stat().st_size != expected:
        return None
    return np.fromfile(path, dtype="<f8").reshape(shape)


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
