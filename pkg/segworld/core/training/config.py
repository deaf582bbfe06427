"""Loading of flat YAML training configs."""

import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml
from pydantic import ValidationError

from ..exceptions import ConfigError, UnreadableFile
from ..models import TrainConfig

logger = logging.getLogger(__name__)


def load_train_config(
    path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None
) -> TrainConfig:
    """Read a TrainConfig; non-None overrides replace file values."""
    path = Path(path)
    try:
        with open(path) as f:
            values = yaml.safe_load(f) or {}
    except OSError as e:
        raise UnreadableFile(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"config {path} is not valid YAML: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"config {path} must be a flat key-value mapping")

    unknown = sorted(set(values) - set(TrainConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        config = TrainConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}: {e}") from e
    logger.debug(f"Loaded train config from {path}: {config}")
    return config


def dump_train_config(config: TrainConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=True)
    return path
