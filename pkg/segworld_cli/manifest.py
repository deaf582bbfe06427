"""Run manifests: what a command was asked to do, written before it does it."""

import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from segworld import __version__
from segworld.core.benchkit.ingest import sidecar_path
from segworld.core.exceptions import UnreadableFile

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
TIMESTAMP_FIELDS = {"created_at"}


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def file_digest(paths: Iterable[Union[str, Path]]) -> str:
    """sha256 over the bytes of existing files, in the given order."""
    digest = hashlib.sha256()
    for path in paths:
        path = Path(path)
        if not path.is_file():
            continue
        digest.update(path.name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(path.read_bytes())
    return digest.hexdigest()


def dataset_hash(path: Optional[Union[str, Path]]) -> Optional[str]:
    """Digest of a dataset together with its vocabulary sidecar."""
    if path is None:
        return None
    path = Path(path)
    if not path.is_file():
        raise UnreadableFile(f"dataset {path} does not exist")
    return file_digest([path, sidecar_path(path)])


class RunManifest(BaseModel):
    """Inputs of one command run; the hash ignores timestamps."""

    model_config = ConfigDict(frozen=True)

    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    dataset_hash: Optional[str] = None
    code_version: str = __version__
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def content(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude=TIMESTAMP_FIELDS)

    @property
    def hash(self) -> str:
        return stable_hash(self.content())


def build_manifest(
    command: str,
    config: Dict[str, Any],
    seed: Optional[int] = None,
    dataset: Optional[Union[str, Path]] = None,
) -> RunManifest:
    return RunManifest(
        command=command, config=config, seed=seed, dataset_hash=dataset_hash(dataset)
    )


def write_manifest(manifest: RunManifest, output_dir: Union[str, Path]) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / MANIFEST_FILE
    payload = {**manifest.model_dump(mode="json"), "hash": manifest.hash}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote manifest {manifest.hash[:12]} to {path}")
    return path


def read_manifest(output_dir: Union[str, Path]) -> Optional[RunManifest]:
    path = Path(output_dir) / MANIFEST_FILE
    if not path.is_file():
        return None
    payload = json.loads(path.read_text())
    payload.pop("hash", None)
    return RunManifest.model_validate(payload)
