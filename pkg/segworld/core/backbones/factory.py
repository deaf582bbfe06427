"""Backbone factory."""

import logging
from enum import Enum

from ..tokenizer import Tokenizer
from .base import BaseBackbone
from .stub import StubBackbone
from .toy import ToyBackbone

logger = logging.getLogger(__name__)


class BackboneType(Enum):
    """Enum for backbone types."""

    TOY = "toy"
    STUB = "stub"


def create_backbone(backbone_type: BackboneType, tokenizer: Tokenizer, **kwargs) -> BaseBackbone:
    """
    Create a backbone of the given type.

    Args:
        backbone_type: The type of backbone to create
        tokenizer: Token vocabulary of the dataset
        **kwargs: Additional arguments passed to the backbone constructor

    Returns:
        A backbone instance
    """
    if backbone_type == BackboneType.TOY:
        logger.info(f"Creating toy backbone {kwargs}")
        return ToyBackbone(tokenizer, **kwargs)
    if backbone_type == BackboneType.STUB:
        logger.info("Creating stub backbone")
        return StubBackbone(tokenizer, **kwargs)
    raise ValueError(f"Unknown backbone type: {backbone_type}")
