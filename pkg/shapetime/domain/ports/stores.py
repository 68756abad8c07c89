from __future__ import annotations

from pathlib import Path
from typing import Protocol

import torch

from shapetime.domain.schemas import CheckpointSidecar


class CheckpointStore(Protocol):
    def save(self, path: str | Path, module: torch.nn.Module, sidecar: CheckpointSidecar) -> list[Path]:
        ...

    def load_into(self, path: str | Path, module: torch.nn.Module) -> CheckpointSidecar:
        ...

    def read_sidecar(self, path: str | Path) -> CheckpointSidecar:
        ...
