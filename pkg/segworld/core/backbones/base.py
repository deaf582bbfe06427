"""Backbone contract."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Sequence

import torch
from torch import nn

from ..features import encode_features
from ..models import BANDS, GridImage
from ..tokenizer import Tokenizer

logger = logging.getLogger(__name__)


@dataclass
class BackboneOutput:
    """Per-position hidden states and next-token logits.

    Row ``text_offset - 1 + j`` of ``logits`` predicts text token ``j``.
    """

    hidden: torch.Tensor
    logits: torch.Tensor
    text_offset: int


class BaseBackbone(nn.Module, ABC):
    """A sequence model over (image tokens ‖ text tokens).

    Stage 0 is the instruction-free observation pass, stage 1 the
    instruction-conditioned chain pass.
    """

    def __init__(self, tokenizer: Tokenizer):
        super().__init__()
        self.tokenizer = tokenizer

    @property
    def vocab_size(self) -> int:
        return self.tokenizer.vocab_size

    @property
    @abstractmethod
    def hidden_dim(self) -> int:
        """Width of the hidden state exposed at every position."""

    @property
    def feature_dim(self) -> int:
        return len(self.tokenizer.vocabularies.objects) * len(BANDS)

    def encode_image(self, image: GridImage) -> torch.Tensor:
        """Frozen (height, width, feature_dim) cell features."""
        return torch.from_numpy(encode_features(image, self.tokenizer))

    def stage0_parameters(self) -> List[nn.Parameter]:
        """Parameters used only by the observation pass."""
        return []

    @abstractmethod
    def forward(
        self, images: Sequence[GridImage], text_ids: torch.Tensor, stage: int
    ) -> BackboneOutput:
        """Run the model over a batch of equally sized images and right-padded text."""
