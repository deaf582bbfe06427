"""The trainable SegWorld model: backbone, [SEG] projection and mask decoder."""

import hashlib
import logging
from typing import List

import torch
from torch import nn

from .backbones import BaseBackbone
from .heads import MaskDecoder, SegProjection

logger = logging.getLogger(__name__)


class SegWorldModel(nn.Module):
    def __init__(self, backbone: BaseBackbone, prompt_dim: int = 32):
        super().__init__()
        self.backbone = backbone
        self.projection = SegProjection(backbone.hidden_dim, prompt_dim)
        self.decoder = MaskDecoder(prompt_dim, backbone.feature_dim)

    @property
    def prompt_dim(self) -> int:
        return self.decoder.weight.shape[0]

    def weights_digest(self) -> str:
        """Digest of the backbone weights, the only weights Stage 0 reads."""
        digest = hashlib.sha1()
        for name, tensor in sorted(self.backbone.state_dict().items()):
            digest.update(name.encode("utf-8"))
            digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
        return digest.hexdigest()

    def stage0_parameters(self) -> List[nn.Parameter]:
        return self.backbone.stage0_parameters()

    def head_parameters(self) -> List[nn.Parameter]:
        return list(self.projection.parameters()) + list(self.decoder.parameters())

    @classmethod
    def oracle(cls, backbone: BaseBackbone, scale: float = 10.0) -> "SegWorldModel":
        """Heads that turn a feature-indicator [SEG] state into its exact region.

        Indicated cells score +scale/2, every other cell -scale/2.
        """
        dim = backbone.feature_dim
        model = cls(backbone, prompt_dim=dim)
        with torch.no_grad():
            model.projection.linear.weight.copy_(torch.eye(dim))
            model.projection.linear.bias.zero_()
            model.decoder.weight.copy_(scale * torch.eye(dim))
            model.decoder.bias.fill_(-scale / 2)
        return model
