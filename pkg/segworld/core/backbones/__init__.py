"""Backbones implementing the sequence-model contract used by the engine."""

from .base import BackboneOutput, BaseBackbone
from .factory import BackboneType, create_backbone
from .stub import StubBackbone
from .toy import ToyBackbone

__all__ = [
    "BackboneOutput",
    "BaseBackbone",
    "BackboneType",
    "StubBackbone",
    "ToyBackbone",
    "create_backbone",
]
