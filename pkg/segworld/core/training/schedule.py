"""Scheduled sampling over Stage-0 contexts and the mixed instruction pool."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..exceptions import MissingInstructionKind, MissingIntentInstruction, MissingSynthesizedContext
from ..models import (
    TARGET_REFERENTIAL_KINDS,
    Instruction,
    InstructionKind,
    Sample,
    ScheduleConfig,
    SceneContext,
)

logger = logging.getLogger(__name__)


class ContextProvenance(Enum):
    SYNTHESIZED = "synthesized"
    SELF_GENERATED = "self_generated"


@dataclass(frozen=True)
class ContextChoice:
    context: SceneContext
    provenance: ContextProvenance

    @property
    def gradient_blocked(self) -> bool:
        """Self-generated contexts enter Stage 1 as constants."""
        return self.provenance == ContextProvenance.SELF_GENERATED


def self_context_probability(t: int, schedule: ScheduleConfig) -> float:
    """min(t / S_warmup, 1) · p_max."""
    if t < 0:
        raise ValueError("step must be non-negative")
    return min(t / schedule.warmup_steps, 1.0) * schedule.p_max


def choose_context(
    t: int,
    schedule: ScheduleConfig,
    rng: np.random.Generator,
    synthesized: Optional[SceneContext],
    self_generated: SceneContext,
) -> ContextChoice:
    if synthesized is None:
        raise MissingSynthesizedContext("training sample has no synthesized context")
    if rng.random() < self_context_probability(t, schedule):
        return ContextChoice(self_generated, ContextProvenance.SELF_GENERATED)
    return ContextChoice(synthesized, ContextProvenance.SYNTHESIZED)


def sample_instruction(sample: Sample, intent_mix: float, rng: np.random.Generator) -> Instruction:
    """Intent with probability intent_mix, else a uniformly chosen target-referential kind."""
    intent = sample.instruction(InstructionKind.INTENT)
    if intent_mix > 0 and intent is None:
        raise MissingIntentInstruction(f"sample {sample.id} has no intent instruction")
    if rng.random() < intent_mix:
        return intent
    referential = [
        sample.instructions[kind]
        for kind in TARGET_REFERENTIAL_KINDS
        if kind in sample.instructions
    ]
    if not referential:
        raise MissingInstructionKind(f"sample {sample.id} has no target-referential instruction")
    return referential[int(rng.integers(len(referential)))]
