"""Token vocabulary shared by the backbones, grammars and serializers."""

import logging
import string
from typing import Dict, Iterable, List, Sequence, Tuple

from .models import Vocabularies

logger = logging.getLogger(__name__)

BG = "<BG>"
PAD = "<PAD>"
UNK = "<UNK>"
EOS = "<EOS>"
QUERY = "<Q>"
SCENE = "<SCENE>"
OBJ = "<OBJ>"
REL = "<REL>"
EVT = "<EVT>"
SLOT_O = "<O>"
SLOT_A = "<A>"
SLOT_P = "<P>"
SLOT_F = "<F>"
SEG = "[SEG]"

SPECIAL_TOKENS: Tuple[str, ...] = (
    BG,
    PAD,
    UNK,
    EOS,
    QUERY,
    SCENE,
    OBJ,
    REL,
    EVT,
    SLOT_O,
    SLOT_A,
    SLOT_P,
    SLOT_F,
    SEG,
)

_STRIP = string.punctuation + "“”‘’"


def normalize_words(text: str) -> List[str]:
    """Lowercase whitespace tokens with edge punctuation stripped."""
    words = []
    for raw in text.replace("’", "'").lower().split():
        word = raw.strip(_STRIP)
        if word:
            words.append(word)
    return words


class Tokenizer:
    """Maps tokens to ids: specials first, then the sidecar vocabularies in order.

    Object names come right after the specials, so grid cells can hold their ids.
    """

    def __init__(self, vocabularies: Vocabularies):
        self.vocabularies = vocabularies
        self._tokens: List[str] = []
        self._ids: Dict[str, int] = {}
        for token in SPECIAL_TOKENS:
            self._add(token)
        self.object_ids = self._add_all(vocabularies.objects)
        self.action_ids = self._add_all(vocabularies.actions)
        self.part_ids = self._add_all(vocabularies.parts)
        self.affordance_ids = self._add_all(vocabularies.affordances)
        self.relation_ids = self._add_all(vocabularies.relations)
        self.scene_ids = self._add_all(vocabularies.scene_words)
        self._add_all(vocabularies.words)
        self._object_index = {token_id: i for i, token_id in enumerate(self.object_ids)}
        logger.debug(f"Tokenizer built with {len(self._tokens)} tokens")

    def _add(self, token: str) -> int:
        if token not in self._ids:
            self._ids[token] = len(self._tokens)
            self._tokens.append(token)
        return self._ids[token]

    def _add_all(self, tokens: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self._add(token) for token in tokens)

    @property
    def vocab_size(self) -> int:
        return len(self._tokens)

    def id(self, token: str) -> int:
        return self._ids.get(token, self._ids[UNK])

    def token(self, token_id: int) -> str:
        return self._tokens[token_id]

    def encode(self, tokens: Iterable[str]) -> List[int]:
        return [self.id(token) for token in tokens]

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self._tokens[int(i)] for i in ids]

    def object_id(self, name: str) -> int:
        return self.object_ids[self.vocabularies.objects.index(name)]

    def object_index(self, token_id: int) -> int:
        """Index of an object token within the object vocabulary, -1 if not an object."""
        return self._object_index.get(int(token_id), -1)

    def is_object(self, token_id: int) -> bool:
        return int(token_id) in self._object_index

    def object_name(self, token_id: int) -> str:
        return self.vocabularies.objects[self._object_index[int(token_id)]]

    def special(self, token: str) -> int:
        return self._ids[token]

    def specials(self, tokens: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self._ids[token] for token in tokens)
