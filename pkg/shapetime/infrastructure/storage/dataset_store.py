from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from shapetime.core.errors import DatasetError
from shapetime.data.synthetic import GENERATOR_VERSION
from shapetime.domain.entities import DatasetSplit, SplitTriple
from shapetime.domain.schemas import DatasetSidecar
from shapetime.infrastructure.storage.binary import read_f64, write_f64

logger = logging.getLogger(__name__)


class FileDatasetStore:
    """`<name>.<split>.<array>.bin` float64 files next to a `<name>.json` sidecar."""

    def __init__(self, root: str | Path) -> None:
        self._root = Path(root)

    def save(self, name: str, splits: SplitTriple, *, kind: str) -> list[Path]:
        written: list[Path] = []
        shapes: dict[str, list[int]] = {}
        seed = splits.train.seed
        for split in splits:
            arrays = {"inputs": split.inputs, "targets": split.targets, **{f"meta_{k}": v for k, v in split.meta.items()}}
            for key, arr in arrays.items():
                rel = f"{split.split}/{key}"
                written.append(write_f64(self._root / f"{name}.{split.split}.{key}.bin", arr))
                shapes[rel] = [int(s) for s in np.shape(arr)]

        sidecar = DatasetSidecar(name=name, kind=kind, seed=seed, generator_version=GENERATOR_VERSION, arrays=shapes)
        side_path = self._root / f"{name}.json"
        side_path.write_text(json.dumps(sidecar.model_dump(mode="json"), indent=2, sort_keys=True), encoding="utf-8")
        written.append(side_path)
        logger.info("dataset_saved", extra={"dataset": name, "files": len(written), "root": str(self._root)})
        return written

    def load(self, path: str | Path) -> SplitTriple:
        side_path = _resolve_sidecar(Path(path))
        try:
            sidecar = DatasetSidecar.model_validate_json(side_path.read_text(encoding="utf-8"))
        except (OSError, ValidationError, ValueError) as exc:
            raise DatasetError(f"unreadable dataset sidecar {side_path}") from exc

        root = side_path.parent
        parts: dict[str, dict[str, np.ndarray]] = {}
        for rel, shape in sidecar.arrays.items():
            split, key = rel.split("/", 1)
            arr = read_f64(root / f"{sidecar.name}.{split}.{key}.bin", tuple(shape))
            if arr is None:
                raise DatasetError(f"dataset array {rel} is missing or does not match shape {shape}")
            parts.setdefault(split, {})[key] = arr

        try:
            triple = SplitTriple(*(_split(name, parts[name], sidecar.seed) for name in ("train", "valid", "test")))
        except KeyError as exc:
            raise DatasetError(f"dataset {sidecar.name} lacks split or array {exc}") from exc
        logger.info("dataset_loaded", extra={"dataset": sidecar.name, "kind": sidecar.kind})
        return triple


def _split(name: str, arrays: dict[str, np.ndarray], seed: int) -> DatasetSplit:
    meta = {k.removeprefix("meta_"): v for k, v in arrays.items() if k.startswith("meta_")}
    return DatasetSplit(split=name, inputs=arrays["inputs"], targets=arrays["targets"], seed=seed, meta=meta)  # type: ignore[arg-type]


def _resolve_sidecar(path: Path) -> Path:
    if path.is_file() and path.suffix == ".json":
        return path
    if path.is_dir():
        candidates = sorted(p for p in path.glob("*.json") if p.name != "manifest.json")
        if len(candidates) == 1:
            return candidates[0]
        if len(candidates) > 1:
            raise DatasetError(f"several dataset sidecars in {path}; pass one explicitly")
    raise DatasetError(f"no dataset found at {path}")
