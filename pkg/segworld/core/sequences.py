"""Token-stream layout of both passes and the grammars that constrain decoding.

Stage 0 response::

    <SCENE> s... <OBJ> o... <REL> (a r b)... <EVT> (action object)... <EOS>

Stage 1 input::

    context ‖ <Q> instruction ‖ <O> o <A> a <P> p <F> f [SEG]

The Stage-0 context is prepended without its <EOS>; an empty context serializes
to nothing.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .exceptions import DecodeOverflow
from .models import Instruction, ReasoningChain, SceneContext
from .tokenizer import (
    EOS,
    EVT,
    OBJ,
    QUERY,
    REL,
    SCENE,
    SEG,
    SLOT_A,
    SLOT_F,
    SLOT_O,
    SLOT_P,
    Tokenizer,
)

logger = logging.getLogger(__name__)

LEVELS: Tuple[str, ...] = (SCENE, OBJ, REL, EVT)


@dataclass(frozen=True)
class LevelBudgets:
    """Maximum number of tokens per Stage-0 level, delimiters excluded."""

    scene: int = 6
    objects: int = 8
    relations: int = 24
    events: int = 16

    def for_level(self, level: str) -> int:
        return {SCENE: self.scene, OBJ: self.objects, REL: self.relations, EVT: self.events}[
            level
        ]

    @property
    def max_response(self) -> int:
        return self.scene + self.objects + self.relations + self.events + len(LEVELS) + 1


STAGE1_MAX_RESPONSE = 16


def context_tokens(context: SceneContext, include_events: bool = True) -> List[str]:
    """Serialized context as token strings, without the closing <EOS>."""
    if context.is_empty:
        return []
    tokens = [SCENE, *context.scene, OBJ, *context.objects, REL]
    for relation in context.relations:
        tokens.extend(relation)
    if include_events:
        tokens.append(EVT)
        for event in context.events:
            tokens.extend(event)
    return tokens


def stage0_target(context: SceneContext, include_events: bool = True) -> List[str]:
    """Stage-0 response for supervision; always closed by <EOS>."""
    if context.is_empty:
        tokens = [SCENE, OBJ, REL] + ([EVT] if include_events else [])
        return tokens + [EOS]
    return context_tokens(context, include_events) + [EOS]


def chain_tokens(chain: ReasoningChain, drop_cot: bool = False) -> List[str]:
    if drop_cot:
        return [SEG]
    return [
        SLOT_O,
        chain.object,
        SLOT_A,
        chain.action,
        SLOT_P,
        chain.part,
        SLOT_F,
        chain.affordance,
        SEG,
    ]


def stage1_prompt(
    context: Optional[SceneContext], instruction: Instruction, include_events: bool = True
) -> List[str]:
    """Context and instruction part of the Stage-1 input."""
    prefix = context_tokens(context, include_events) if context is not None else []
    return prefix + [QUERY, *instruction.text]


def parse_context(tokens: Sequence[str]) -> SceneContext:
    """Inverse of stage0_target; tolerant of malformed free-mode output."""
    levels = {level: [] for level in LEVELS}  # type: dict
    current = None
    for token in tokens:
        if token == EOS:
            break
        if token in levels:
            current = token
            continue
        if current is not None:
            levels[current].append(token)
    relations = levels[REL]
    events = levels[EVT]
    return SceneContext(
        scene=tuple(levels[SCENE]),
        objects=tuple(levels[OBJ]),
        relations=tuple(
            tuple(relations[i : i + 3]) for i in range(0, len(relations) - len(relations) % 3, 3)
        ),
        events=tuple(tuple(events[i : i + 2]) for i in range(0, len(events) - len(events) % 2, 2)),
    )


def parse_chain(tokens: Sequence[str]) -> ReasoningChain:
    """Read the slot values of a Stage-1 response; missing slots stay empty."""
    slots = {SLOT_O: "object", SLOT_A: "action", SLOT_P: "part", SLOT_F: "affordance"}
    values = {}
    for i, token in enumerate(tokens):
        if token in slots and i + 1 < len(tokens) and tokens[i + 1] not in slots:
            if tokens[i + 1] not in (SEG, EOS):
                values.setdefault(slots[token], tokens[i + 1])
    return ReasoningChain(**values)


class Stage0Grammar:
    """Next-token constraints for the observation pass.

    In constrained mode ``allowed`` returns the admissible ids; reaching a level
    budget forces the next delimiter. In free mode it returns None and ``check``
    raises DecodeOverflow on a budget overrun.
    """

    def __init__(
        self,
        tokenizer: Tokenizer,
        include_events: bool = True,
        constrained: bool = True,
        budgets: LevelBudgets = LevelBudgets(),
    ):
        self.tokenizer = tokenizer
        self.include_events = include_events
        self.constrained = constrained
        self.budgets = budgets
        self.eos = tokenizer.special(EOS)
        self._delimiters = {tokenizer.special(level): level for level in LEVELS}

    def _split(self, prefix: Sequence[int]) -> Tuple[Optional[str], List[int], List[int]]:
        """Current level, its tokens so far, and the listed object ids."""
        level: Optional[str] = None
        body: List[int] = []
        objects: List[int] = []
        for token_id in prefix:
            if token_id in self._delimiters:
                level = self._delimiters[token_id]
                body = []
                continue
            body.append(token_id)
            if level == OBJ:
                objects.append(token_id)
        return level, body, objects

    def is_complete(self, prefix: Sequence[int]) -> bool:
        return bool(prefix) and prefix[-1] == self.eos

    def allowed(self, prefix: Sequence[int]) -> Optional[List[int]]:
        if not self.constrained:
            return None
        tok = self.tokenizer
        if not prefix:
            return [tok.special(SCENE)]
        level, body, objects = self._split(prefix)
        budget = self.budgets.for_level(level) if level else 0
        if level == SCENE:
            closer = [tok.special(OBJ)]
            return closer if len(body) >= budget else list(tok.scene_ids) + closer
        if level == OBJ:
            closer = [tok.special(REL)]
            remaining = [i for i in tok.object_ids if i not in objects]
            if len(body) >= budget or not remaining:
                return closer
            return remaining + closer
        if level == REL:
            closer = [tok.special(EVT)] if self.include_events else [self.eos]
            position = len(body) % 3
            if position == 0:
                if len(body) + 3 > budget or len(objects) < 2:
                    return closer
                return list(dict.fromkeys(objects)) + closer
            if position == 1:
                return list(tok.relation_ids)
            first = body[-2]
            return [i for i in dict.fromkeys(objects) if i != first] or list(objects)
        if level == EVT:
            position = len(body) % 2
            if position == 0:
                if len(body) + 2 > budget or not objects:
                    return [self.eos]
                return list(tok.action_ids) + [self.eos]
            return list(dict.fromkeys(objects))
        return [self.eos]

    def check(self, prefix: Sequence[int]) -> None:
        """Raise DecodeOverflow when a level of a free-mode prefix is over budget."""
        if len(prefix) > self.budgets.max_response:
            raise DecodeOverflow(f"observation exceeded {self.budgets.max_response} tokens")
        level, body, _ = self._split(prefix)
        if level is not None and len(body) > self.budgets.for_level(level):
            raise DecodeOverflow(
                f"level {level} exceeded its budget of {self.budgets.for_level(level)}"
            )


class Stage1Grammar:
    """Next-token constraints for the chain pass: delimiters forced, slots typed."""

    def __init__(self, tokenizer: Tokenizer, constrained: bool = True):
        self.tokenizer = tokenizer
        self.constrained = constrained
        self.seg = tokenizer.special(SEG)
        self.eos = tokenizer.special(EOS)
        self._pattern: List[List[int]] = [
            [tokenizer.special(SLOT_O)],
            list(tokenizer.object_ids),
            [tokenizer.special(SLOT_A)],
            list(tokenizer.action_ids),
            [tokenizer.special(SLOT_P)],
            list(tokenizer.part_ids),
            [tokenizer.special(SLOT_F)],
            list(tokenizer.affordance_ids),
            [self.seg],
        ]

    def is_complete(self, prefix: Sequence[int]) -> bool:
        return bool(prefix) and prefix[-1] in (self.seg, self.eos)

    def allowed(self, prefix: Sequence[int]) -> Optional[List[int]]:
        if not self.constrained:
            return None
        return self._pattern[min(len(prefix), len(self._pattern) - 1)]

    def check(self, prefix: Sequence[int]) -> None:
        if len(prefix) > STAGE1_MAX_RESPONSE:
            raise DecodeOverflow(f"chain exceeded {STAGE1_MAX_RESPONSE} tokens without [SEG]")
