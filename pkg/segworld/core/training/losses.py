"""Mask and language-modeling losses and their weighted combination."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..exceptions import DimensionMismatch, LengthMismatch
from ..models import BinaryMask, LossWeights

logger = logging.getLogger(__name__)

DICE_EPS = 1e-6

Target = Union[torch.Tensor, BinaryMask, np.ndarray]


def _target(gt: Target, like: torch.Tensor) -> torch.Tensor:
    if isinstance(gt, BinaryMask):
        gt = gt.bits
    target = torch.as_tensor(np.asarray(gt) if not isinstance(gt, torch.Tensor) else gt)
    target = target.to(dtype=like.dtype, device=like.device)
    if target.shape != like.shape:
        raise DimensionMismatch(f"prediction {tuple(like.shape)} vs target {tuple(target.shape)}")
    return target


def dice_loss(pred_probs: torch.Tensor, gt: Target, batched: bool = False) -> torch.Tensor:
    """1 − (2·Σp·g + ε)/(Σp + Σg + ε); with batched, averaged over rows of (batch, cells)."""
    target = _target(gt, pred_probs)
    if batched:
        dims = tuple(range(1, pred_probs.dim()))
        numerator = 2 * (pred_probs * target).sum(dim=dims) + DICE_EPS
        denominator = pred_probs.sum(dim=dims) + target.sum(dim=dims) + DICE_EPS
        return (1 - numerator / denominator).mean()
    numerator = 2 * (pred_probs * target).sum() + DICE_EPS
    return 1 - numerator / (pred_probs.sum() + target.sum() + DICE_EPS)


def bce_loss(pred_logits: torch.Tensor, gt: Target) -> torch.Tensor:
    """Mean logistic cross-entropy over cells."""
    return F.binary_cross_entropy_with_logits(pred_logits, _target(gt, pred_logits))


def lm_loss(
    token_logprobs: torch.Tensor,
    target_tokens: torch.Tensor,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Mean negative log-probability of the targets over masked-in positions.

    ``token_logprobs`` is either a distribution per position (..., V) or the
    already-gathered log-probabilities of the targets (same shape as targets).
    """
    target_tokens = torch.as_tensor(target_tokens)
    if token_logprobs.shape == target_tokens.shape:
        picked = token_logprobs
    elif token_logprobs.shape[:-1] == target_tokens.shape:
        picked = token_logprobs.gather(-1, target_tokens.long().unsqueeze(-1)).squeeze(-1)
    else:
        raise LengthMismatch(
            f"log-probabilities {tuple(token_logprobs.shape)} do not align with "
            f"targets {tuple(target_tokens.shape)}"
        )
    if mask is None:
        return -picked.mean()
    mask = torch.as_tensor(mask, device=picked.device)
    if mask.shape != picked.shape:
        raise LengthMismatch(f"mask {tuple(mask.shape)} does not align with {tuple(picked.shape)}")
    weights = mask.to(picked.dtype)
    return -(picked * weights).sum() / weights.sum().clamp_min(1.0)


def combine(mask_loss, lm0, lm1, weights: LossWeights):
    """λ_mask·mask + λ_0·lm0 + λ_1·lm1."""
    return weights.lambda_mask * mask_loss + weights.lambda_0 * lm0 + weights.lambda_1 * lm1


@dataclass
class LossBreakdown:
    bce: torch.Tensor
    dice: torch.Tensor
    lm0: torch.Tensor
    lm1: torch.Tensor
    weights: LossWeights

    @property
    def mask(self) -> torch.Tensor:
        return self.bce + self.dice

    @property
    def weighted_mask(self) -> torch.Tensor:
        return self.weights.lambda_mask * self.mask

    @property
    def weighted_lm0(self) -> torch.Tensor:
        return self.weights.lambda_0 * self.lm0

    @property
    def weighted_lm1(self) -> torch.Tensor:
        return self.weights.lambda_1 * self.lm1

    @property
    def total(self) -> torch.Tensor:
        return self.weighted_mask + self.weighted_lm0 + self.weighted_lm1

    def as_log(self) -> Dict[str, float]:
        return {
            "loss_bce": float(self.bce),
            "loss_dice": float(self.dice),
            "loss_mask": float(self.mask),
            "loss_lm0": float(self.lm0),
            "loss_lm1": float(self.lm1),
            "weighted_mask": float(self.weighted_mask),
            "weighted_lm0": float(self.weighted_lm0),
            "weighted_lm1": float(self.weighted_lm1),
            "total": float(self.total),
        }


def total_loss(
    mask_logits: torch.Tensor,
    mask_gt: Target,
    lm0: torch.Tensor,
    lm1: torch.Tensor,
    weights: LossWeights,
) -> LossBreakdown:
    """Joint objective; mask logits are (batch, cells) and the mask term is bce + dice."""
    batched = mask_logits.dim() > 1
    return LossBreakdown(
        bce=bce_loss(mask_logits, mask_gt),
        dice=dice_loss(torch.sigmoid(mask_logits), mask_gt, batched=batched),
        lm0=lm0,
        lm1=lm1,
        weights=weights,
    )
