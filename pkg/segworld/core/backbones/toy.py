"""Desk-scale transformer backbone."""

import logging
from typing import List, Sequence

import numpy as np
import torch
from torch import nn

from ..exceptions import DecodeOverflow, DimensionMismatch
from ..models import GridImage
from ..tokenizer import Tokenizer
from .base import BackboneOutput, BaseBackbone

logger = logging.getLogger(__name__)


class ToyBackbone(BaseBackbone):
    """Pre-LN transformer over image cells followed by text.

    The image and the observation prompt form a bidirectional prefix; text
    positions are causal. The learned observation prompt is prepended only in
    stage 0 and is the only parameter private to that stage.
    """

    def __init__(
        self,
        tokenizer: Tokenizer,
        hidden_dim: int = 64,
        num_layers: int = 2,
        num_heads: int = 4,
        prompt_length: int = 4,
        max_text: int = 192,
        max_grid: int = 32,
    ):
        super().__init__(tokenizer)
        self._hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.num_heads = num_heads
        self.max_text = max_text
        self.max_grid = max_grid
        self.token_embedding = nn.Embedding(tokenizer.vocab_size, hidden_dim)
        self.row_embedding = nn.Embedding(max_grid, hidden_dim)
        self.col_embedding = nn.Embedding(max_grid, hidden_dim)
        self.position_embedding = nn.Embedding(max_text, hidden_dim)
        self.observation_prompt = nn.Parameter(torch.randn(prompt_length, hidden_dim) * 0.02)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_dim,
            nhead=num_heads,
            dim_feedforward=4 * hidden_dim,
            dropout=0.0,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers, enable_nested_tensor=False)
        self.final_norm = nn.LayerNorm(hidden_dim)
        self.lm_head = nn.Linear(hidden_dim, tokenizer.vocab_size)
        for embedding in (
            self.token_embedding,
            self.row_embedding,
            self.col_embedding,
            self.position_embedding,
        ):
            nn.init.normal_(embedding.weight, std=0.02)

    @property
    def hidden_dim(self) -> int:
        return self._hidden_dim

    def stage0_parameters(self) -> List[nn.Parameter]:
        return [self.observation_prompt]

    @staticmethod
    def _attention_mask(prefix: int, total: int, device) -> torch.Tensor:
        masked = torch.triu(torch.ones(total, total, dtype=torch.bool, device=device), diagonal=1)
        masked[:prefix, :prefix] = False
        return masked

    def forward(
        self, images: Sequence[GridImage], text_ids: torch.Tensor, stage: int
    ) -> BackboneOutput:
        if len(images) != text_ids.shape[0]:
            raise DimensionMismatch(f"{len(images)} images for {text_ids.shape[0]} sequences")
        shapes = {(image.height, image.width) for image in images}
        if len(shapes) != 1:
            raise DimensionMismatch("a batch must share one grid size")
        height, width = shapes.pop()
        if height > self.max_grid or width > self.max_grid:
            raise DimensionMismatch(f"grid {height}x{width} exceeds {self.max_grid}")
        length = text_ids.shape[1]
        if length > self.max_text:
            raise DecodeOverflow(f"text of {length} tokens exceeds {self.max_text}")

        device = self.token_embedding.weight.device
        batch = len(images)
        cells = torch.as_tensor(np.stack([image.cells for image in images]), device=device)
        rows = self.row_embedding(torch.arange(height, device=device))
        cols = self.col_embedding(torch.arange(width, device=device))
        image_embed = self.token_embedding(cells) + rows[None, :, None, :] + cols[None, None, :, :]
        parts = [image_embed.reshape(batch, height * width, self.hidden_dim)]
        if stage == 0:
            parts.append(self.observation_prompt.unsqueeze(0).expand(batch, -1, -1))
        positions = self.position_embedding(torch.arange(length, device=device))
        parts.append(self.token_embedding(text_ids.to(device)) + positions.unsqueeze(0))

        x = torch.cat(parts, dim=1)
        offset = x.shape[1] - length
        mask = self._attention_mask(offset, x.shape[1], device)
        hidden = self.final_norm(self.encoder(x, mask=mask))
        return BackboneOutput(hidden=hidden, logits=self.lm_head(hidden), text_offset=offset)
