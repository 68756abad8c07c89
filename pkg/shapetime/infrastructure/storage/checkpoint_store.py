from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import torch
from pydantic import ValidationError

from shapetime.core.errors import CheckpointError
from shapetime.domain.schemas import CheckpointSidecar
from shapetime.infrastructure.storage.binary import read_f64, write_f64

logger = logging.getLogger(__name__)


def _paths(path: str | Path) -> tuple[Path, Path]:
    p = Path(path)
    stem = p.with_suffix("") if p.suffix in (".bin", ".json") else p
    return stem.with_name(stem.name + ".bin"), stem.with_name(stem.name + ".json")


def parameter_layout(module: torch.nn.Module) -> list[tuple[str, list[int]]]:
    return [(name, [int(s) for s in t.shape]) for name, t in module.state_dict().items()]


class FileCheckpointStore:
    """Flat float64 weights in state_dict order plus a JSON sidecar."""

    def save(self, path: str | Path, module: torch.nn.Module, sidecar: CheckpointSidecar) -> list[Path]:
        bin_path, side_path = _paths(path)
        state = module.state_dict()
        flat = [t.detach().cpu().to(torch.float64).reshape(-1).numpy() for t in state.values()]
        write_f64(bin_path, np.concatenate(flat) if flat else np.zeros(0))
        side_path.write_text(json.dumps(sidecar.model_dump(mode="json"), indent=2, sort_keys=True), encoding="utf-8")
        logger.info("checkpoint_saved", extra={"path": str(bin_path), "epoch": sidecar.epoch})
        return [bin_path, side_path]

    def read_sidecar(self, path: str | Path) -> CheckpointSidecar:
        _, side_path = _paths(path)
        try:
            return CheckpointSidecar.model_validate_json(side_path.read_text(encoding="utf-8"))
        except (OSError, ValidationError, ValueError) as exc:
            raise CheckpointError(f"unreadable checkpoint sidecar {side_path}") from exc

    def load_into(self, path: str | Path, module: torch.nn.Module) -> CheckpointSidecar:
        sidecar = self.read_sidecar(path)
        bin_path, _ = _paths(path)
        expected = parameter_layout(module)
        if [(n, list(s)) for n, s in sidecar.layout] != expected:
            raise CheckpointError("checkpoint layout does not match the model architecture")
        total = sum(int(np.prod(s, dtype=np.int64)) for _, s in expected)
        flat = read_f64(bin_path, (total,))
        if flat is None:
            raise CheckpointError(f"checkpoint weights {bin_path} are missing or truncated")

        state = {}
        offset = 0
        for name, shape in expected:
            size = int(np.prod(shape, dtype=np.int64))
            state[name] = torch.from_numpy(flat[offset : offset + size].reshape(shape).copy())
            offset += size
        module.load_state_dict(state)
        return sidecar
