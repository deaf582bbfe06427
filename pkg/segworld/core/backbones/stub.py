"""Deterministic oracle backbone built from lookup tables."""

import logging
import math
from collections import Counter
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import torch

from ..features import feature_indices, part_bands
from ..models import GridImage, ReasoningChain, SceneContext
from ..sequences import chain_tokens, parse_context, stage0_target
from ..tokenizer import EOS, PAD, QUERY, SEG, SLOT_O, Tokenizer
from .base import BackboneOutput, BaseBackbone

logger = logging.getLogger(__name__)

IMPOSSIBLE = -1e9
CONFIDENT = 20.0

Observer = Callable[[GridImage], Sequence[SceneContext]]
InstructionKey = Tuple[str, ...]


class StubBackbone(BaseBackbone):
    """Non-learned backbone with table-defined behaviour.

    Stage 0 predicts a uniform mixture over the observer's contexts for the
    image (by default a single context echoing the grid's objects). Stage 1
    looks the chain up by instruction, or by (instruction, first context
    object) when ``contextual_chains`` has an entry, and its [SEG] hidden state
    is the indicator of the target part's feature channels. Instructions with
    no entry end in <EOS>.
    """

    def __init__(
        self,
        tokenizer: Tokenizer,
        chains: Optional[Mapping[InstructionKey, ReasoningChain]] = None,
        contextual_chains: Optional[Mapping[Tuple[InstructionKey, str], ReasoningChain]] = None,
        observer: Optional[Observer] = None,
    ):
        super().__init__(tokenizer)
        self._chains: Dict[InstructionKey, ReasoningChain] = {
            self._key(words): chain for words, chain in (chains or {}).items()
        }
        self._contextual: Dict[Tuple[InstructionKey, str], ReasoningChain] = {
            (self._key(words), obj): chain
            for (words, obj), chain in (contextual_chains or {}).items()
        }
        self._observer = observer or self.echo_objects
        self._specials = {
            name: tokenizer.special(name) for name in (EOS, PAD, QUERY, SEG, SLOT_O)
        }

    def _key(self, words: Sequence[str]) -> InstructionKey:
        return tuple(self.tokenizer.decode(self.tokenizer.encode(words)))

    def echo_objects(self, image: GridImage) -> List[SceneContext]:
        names = tuple(self.tokenizer.object_name(t) for t in image.object_tokens())
        return [SceneContext(scene=(), objects=names, relations=(), events=())]

    @property
    def hidden_dim(self) -> int:
        return self.feature_dim

    def lookup(self, words: Sequence[str], first_object: Optional[str]) -> Optional[ReasoningChain]:
        key = self._key(words)
        if first_object is not None and (key, first_object) in self._contextual:
            return self._contextual[(key, first_object)]
        return self._chains.get(key)

    def seg_vector(self, chain: Optional[ReasoningChain]) -> torch.Tensor:
        vector = torch.zeros(self.feature_dim)
        if chain is None or chain.object not in self.tokenizer.vocabularies.objects:
            return vector
        bands = part_bands(self.tokenizer, chain.object, chain.part)
        vector[feature_indices(self.tokenizer, chain.object, bands)] = 1.0
        return vector

    def _stage0_logits(self, image: GridImage, text: List[int], rows: torch.Tensor, offset: int):
        variants = [
            self.tokenizer.encode(stage0_target(context)) for context in self._observer(image)
        ]
        for j in range(len(text) + 1):
            prefix = text[:j]
            following = Counter(v[j] for v in variants if len(v) > j and v[:j] == prefix)
            row = rows[offset - 1 + j]
            row.fill_(IMPOSSIBLE)
            if not following:
                row[self._specials[EOS]] = 0.0
                continue
            total = sum(following.values())
            for token_id, count in following.items():
                row[token_id] = math.log(count / total)

    def _stage1(self, text: List[int], rows: torch.Tensor, hidden: torch.Tensor, offset: int):
        query, seg = self._specials[QUERY], self._specials[SEG]
        if query not in text:
            rows[:, self._specials[EOS]] = CONFIDENT
            return
        q = text.index(query)
        stops = {self._specials[SLOT_O], seg, self._specials[EOS], self._specials[PAD]}
        r = next((i for i in range(q + 1, len(text)) if text[i] in stops), len(text))
        context = parse_context(self.tokenizer.decode(text[:q]))
        words = self.tokenizer.decode(text[q + 1 : r])
        chain = self.lookup(words, context.objects[0] if context.objects else None)
        target = self.tokenizer.encode(chain_tokens(chain)) if chain else []
        for k in range(len(text) - r + 1):
            row = rows[offset - 1 + r + k]
            token_id = target[k] if k < len(target) else self._specials[EOS]
            row[token_id] = CONFIDENT
        vector = self.seg_vector(chain)
        for i in range(r, len(text)):
            if text[i] == seg:
                hidden[offset + i] = vector

    def forward(
        self, images: Sequence[GridImage], text_ids: torch.Tensor, stage: int
    ) -> BackboneOutput:
        batch, length = text_ids.shape
        offset = max(image.height * image.width for image in images)
        logits = torch.zeros(batch, offset + length, self.vocab_size)
        hidden = torch.zeros(batch, offset + length, self.hidden_dim)
        for b, image in enumerate(images):
            text = [int(t) for t in text_ids[b].tolist()]
            while text and text[-1] == self._specials[PAD]:
                text.pop()
            if stage == 0:
                self._stage0_logits(image, text, logits[b], offset)
            else:
                self._stage1(text, logits[b], hidden[b], offset)
        return BackboneOutput(hidden=hidden, logits=logits, text_offset=offset)
