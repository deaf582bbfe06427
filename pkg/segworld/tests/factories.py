"""Builders for small hand-placed scenes used across the unit tests."""

from typing import Dict, Optional, Tuple

import numpy as np

from segworld.core.benchkit.toy import (
    INTENTS,
    REASONING_TEMPLATE,
    REFERRING_TEMPLATE,
    toy_vocabularies,
)
from segworld.core.features import region_mask
from segworld.core.models import (
    BinaryMask,
    GridImage,
    Instruction,
    InstructionKind,
    ReasoningChain,
    Sample,
    SceneContext,
)
from segworld.core.tokenizer import Tokenizer, normalize_words

VOCABULARIES = toy_vocabularies()
TOKENIZER = Tokenizer(VOCABULARIES)

Box = Tuple[int, int, int, int]

# mug and kettle one empty column apart, bottle far below
MUG_BOX: Box = (0, 2, 0, 2)
KETTLE_BOX: Box = (0, 2, 4, 7)
BOTTLE_BOX: Box = (4, 7, 5, 7)

MUG_HOLD = ReasoningChain(object="mug", action="hold", part="handle", affordance="graspable")
KETTLE_POUR = ReasoningChain(object="kettle", action="pour", part="spout", affordance="pourable")
BOTTLE_POUR = ReasoningChain(object="bottle", action="pour", part="neck", affordance="pourable")


def grid(placements: Dict[str, Box], size: int = 8) -> GridImage:
    cells = np.zeros((size, size), dtype=np.int64)
    for name, (top, bottom, left, right) in placements.items():
        cells[top : bottom + 1, left : right + 1] = TOKENIZER.object_id(name)
    return GridImage(width=size, height=size, cells=cells, feature_dim=VOCABULARIES.feature_dim)


def mask(rows, cols, size: int = 4) -> BinaryMask:
    bits = np.zeros((size, size), dtype=bool)
    bits[np.ix_(rows, cols)] = True
    return BinaryMask.from_array(bits)


def instruction(text: str, kind: InstructionKind = InstructionKind.INTENT) -> Instruction:
    return Instruction(text=tuple(normalize_words(text)), kind=kind, raw=text)


def instructions_for(chain: ReasoningChain, intent: Optional[str] = None):
    fields = chain.terms()
    texts = {
        InstructionKind.REFERRING: REFERRING_TEMPLATE.format(**fields),
        InstructionKind.REASONING: REASONING_TEMPLATE.format(**fields),
        InstructionKind.INTENT: intent or INTENTS[(chain.object, chain.action)],
    }
    return {kind: instruction(text, kind) for kind, text in texts.items()}


def make_sample(
    sample_id: str = "s-0",
    base_image_id: Optional[str] = "base-0",
    split: str = "train",
    placements: Optional[Dict[str, Box]] = None,
    chain: ReasoningChain = MUG_HOLD,
    intent: Optional[str] = None,
    observation: Optional[SceneContext] = None,
) -> Sample:
    image = grid(placements or {"mug": MUG_BOX, "kettle": KETTLE_BOX})
    return Sample(
        id=sample_id,
        base_image_id=base_image_id,
        split=split,
        image=image,
        instructions=instructions_for(chain, intent),
        chain=chain,
        mask_gt=region_mask(image, TOKENIZER, chain.object, chain.part),
        observation=observation,
    )
