from __future__ import annotations

from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest
import torch

from shapetime.core.config import get_settings
from shapetime.data import SyntheticConfig


@pytest.fixture(scope="session", autouse=True)
def _float64_default() -> Iterator[None]:
    previous = torch.get_default_dtype()
    torch.set_default_dtype(torch.float64)
    yield
    torch.set_default_dtype(previous)


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    for name in ("APP_ENV", "THREADS", "OUT_DIR", "DEFAULT_GAMMA", "DEFAULT_ALPHA", "QUALITY_FLOOR", "LOG_JSON"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def tiny_synthetic() -> SyntheticConfig:
    """Generator settings small enough for end-to-end training in a test."""
    return SyntheticConfig(det_size=24, prob_inputs=6, prob_futures=4)
