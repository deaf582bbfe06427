"""[SEG] projection and per-cell mask decoder."""

import logging

import torch
from torch import nn

from .exceptions import DimensionMismatch

logger = logging.getLogger(__name__)


class SegProjection(nn.Module):
    """Affine map from the [SEG] hidden state to the decoder prompt."""

    def __init__(self, hidden_dim: int, prompt_dim: int):
        super().__init__()
        self.linear = nn.Linear(hidden_dim, prompt_dim)

    def forward(self, hidden: torch.Tensor) -> torch.Tensor:
        return self.linear(hidden)


class MaskDecoder(nn.Module):
    """Bilinear per-cell score: logit = prompt · (U feature) + bias."""

    def __init__(self, prompt_dim: int, feature_dim: int):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(prompt_dim, feature_dim) * 0.02)
        self.bias = nn.Parameter(torch.zeros(()))

    @property
    def feature_dim(self) -> int:
        return self.weight.shape[1]

    def to_feature_space(self, prompt: torch.Tensor) -> torch.Tensor:
        """Uᵀ·prompt, the direction in feature space a prompt selects."""
        return prompt @ self.weight

    def forward(self, prompt: torch.Tensor, features: torch.Tensor) -> torch.Tensor:
        """
        Args:
            prompt: (batch, prompt_dim)
            features: (batch, cells, feature_dim)

        Returns:
            (batch, cells) logits
        """
        if features.shape[-1] != self.feature_dim:
            raise DimensionMismatch(
                f"features have {features.shape[-1]} channels, decoder expects {self.feature_dim}"
            )
        features = features.to(self.weight.dtype)
        directions = self.to_feature_space(prompt)
        return torch.einsum("bf,bnf->bn", directions, features) + self.bias
