from __future__ import annotations

import json
from pathlib import Path

from shapetime.domain.schemas import Manifest, ManifestEntry
from shapetime.infrastructure.storage.binary import sha256_file

MANIFEST_NAME = "manifest.json"


def write_manifest(out_dir: str | Path, *, command: str, config_hash: str) -> Path:
    """Index every file under out_dir (except the manifest itself) with its SHA-256."""
    root = Path(out_dir)
    entries = [
        ManifestEntry(path=p.relative_to(root).as_posix(), sha256=sha256_file(p))
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name != MANIFEST_NAME
    ]
    manifest = Manifest(command=command, config_hash=config_hash, files=entries)
    path = root / MANIFEST_NAME
    path.write_text(json.dumps(manifest.model_dump(mode="json"), indent=2), encoding="utf-8")
    return path
