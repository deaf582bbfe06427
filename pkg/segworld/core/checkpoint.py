"""Checkpoint archives: ``config.json`` plus ``weights.npz`` in one zip file.

Entries are written with a fixed timestamp so identical weights give
byte-identical archives.
"""

import io
import json
import logging
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch

from .backbones import BackboneType, ToyBackbone, create_backbone
from .exceptions import CheckpointError, UnreadableFile
from .model import SegWorldModel
from .models import EngineConfig, TrainConfig, Vocabularies
from .tokenizer import Tokenizer

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
CONFIG_ENTRY = "config.json"
WEIGHTS_ENTRY = "weights.npz"
_EPOCH = (1980, 1, 1, 0, 0, 0)


@dataclass
class LoadedCheckpoint:
    model: SegWorldModel
    tokenizer: Tokenizer
    config: Dict[str, Any]

    @property
    def engine_config(self) -> EngineConfig:
        return EngineConfig.model_validate(self.config.get("engine", {}))

    @property
    def train_config(self) -> Optional[TrainConfig]:
        train = self.config.get("train")
        return TrainConfig.model_validate(train) if train else None


def _entry(name: str) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    return info


def _weights_archive(model: SegWorldModel) -> bytes:
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        for key, tensor in sorted(model.state_dict().items()):
            array = io.BytesIO()
            np.lib.format.write_array(array, tensor.detach().cpu().numpy(), allow_pickle=False)
            archive.writestr(_entry(f"{key}.npy"), array.getvalue())
    return buffer.getvalue()


def model_spec(model: SegWorldModel) -> Dict[str, Any]:
    backbone = model.backbone
    if not isinstance(backbone, ToyBackbone):
        raise CheckpointError("only toy-backbone models can be checkpointed")
    return {
        "backbone": BackboneType.TOY.value,
        "hidden_dim": backbone.hidden_dim,
        "num_layers": backbone.num_layers,
        "num_heads": backbone.num_heads,
        "prompt_dim": model.prompt_dim,
    }


def save_checkpoint(
    path: Union[str, Path],
    model: SegWorldModel,
    vocabularies: Vocabularies,
    train_config: Optional[TrainConfig] = None,
    engine_config: Optional[EngineConfig] = None,
) -> Path:
    """Write a toy-backbone model and everything needed to rebuild it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    config = {
        "version": CHECKPOINT_VERSION,
        "model": model_spec(model),
        "train": train_config.model_dump(mode="json") if train_config else None,
        "engine": (engine_config or EngineConfig()).model_dump(mode="json"),
        "vocabularies": vocabularies.model_dump(mode="json"),
    }
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr(_entry(CONFIG_ENTRY), json.dumps(config, sort_keys=True, indent=2))
        archive.writestr(_entry(WEIGHTS_ENTRY), _weights_archive(model))
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> LoadedCheckpoint:
    path = Path(path)
    if not path.is_file():
        raise UnreadableFile(f"checkpoint {path} does not exist")
    try:
        with zipfile.ZipFile(path) as archive:
            names = set(archive.namelist())
            missing = {CONFIG_ENTRY, WEIGHTS_ENTRY} - names
            if missing:
                raise CheckpointError(f"checkpoint {path} lacks {sorted(missing)}")
            config = json.loads(archive.read(CONFIG_ENTRY))
            weights = archive.read(WEIGHTS_ENTRY)
    except zipfile.BadZipFile as e:
        raise CheckpointError(f"{path} is not a checkpoint archive") from e

    version = config.get("version")
    if version is None:
        raise CheckpointError(f"checkpoint {path} has no version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")

    vocabularies = Vocabularies.model_validate(config["vocabularies"])
    tokenizer = Tokenizer(vocabularies)
    spec = config["model"]
    backbone = create_backbone(
        BackboneType(spec["backbone"]),
        tokenizer,
        hidden_dim=spec["hidden_dim"],
        num_layers=spec["num_layers"],
        num_heads=spec["num_heads"],
    )
    model = SegWorldModel(backbone, prompt_dim=spec["prompt_dim"])
    with np.load(io.BytesIO(weights), allow_pickle=False) as arrays:
        state = {key: torch.from_numpy(arrays[key].copy()) for key in arrays.files}
    try:
        model.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"weights do not match the model: {e}") from e
    model.eval()
    logger.info(f"Loaded checkpoint {path} (version {version})")
    return LoadedCheckpoint(model=model, tokenizer=tokenizer, config=config)
