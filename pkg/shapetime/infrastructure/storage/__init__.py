from shapetime.infrastructure.storage.checkpoint_store import FileCheckpointStore, parameter_layout
from shapetime.infrastructure.storage.dataset_store import FileDatasetStore
from shapetime.infrastructure.storage.manifest import MANIFEST_NAME, write_manifest

__all__ = ["MANIFEST_NAME", "FileCheckpointStore", "FileDatasetStore", "parameter_layout", "write_manifest"]
