"""Synthetic desk-scale Intent2Part world.

Images are 8x8 grids holding two or three solid rectangular objects, each kept
at least one empty cell away from the others. Every sample targets one chain
that is unambiguous in its layout: exactly one present object affords the
action, where a relational action (pouring) only counts for an object placed
next to its partner (the mug).

The ``context_informative`` variant places the mug with both a kettle and a
bottle, only one of them next to the mug, and shares one intent text between
the two outcomes. The adjacent pourer is the target, which the event level of
the scene context names explicitly.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..features import region_mask
from ..models import (
    GridImage,
    Instruction,
    InstructionKind,
    ObjectAffordance,
    ReasoningChain,
    Sample,
    Vocabularies,
)
from ..tokenizer import Tokenizer, normalize_words
from .ingest import sample_to_record, sidecar_path, write_vocabularies
from .observation import RuleBasedDescriber, box_gap

logger = logging.getLogger(__name__)

GRID_SIZE = 8
MAX_ATTEMPTS = 1000

Box = Tuple[int, int, int, int]


@dataclass(frozen=True)
class ToyObject:
    name: str
    rows: int
    cols: int
    scene: str
    chains: Tuple[Tuple[str, str, Tuple[str, ...], str], ...]


TOY_OBJECTS: Tuple[ToyObject, ...] = (
    ToyObject(
        "mug",
        3,
        3,
        "kitchen",
        (("hold", "handle", ("right",), "graspable"), ("drink", "rim", ("top",), "sippable")),
    ),
    ToyObject(
        "kettle",
        3,
        4,
        "kitchen",
        (("pour", "spout", ("left",), "pourable"), ("lift", "handle", ("top",), "liftable")),
    ),
    ToyObject(
        "bottle",
        4,
        3,
        "kitchen",
        (
            ("pour", "neck", ("top",), "pourable"),
            ("squeeze", "body", ("interior",), "squeezable"),
        ),
    ),
    ToyObject(
        "knife",
        3,
        4,
        "kitchen",
        (("cut", "blade", ("left",), "sharp"), ("hold", "handle", ("right",), "graspable")),
    ),
    ToyObject(
        "chair",
        4,
        3,
        "patio",
        (("sit", "seat", ("interior",), "sittable"), ("lean", "back", ("top",), "supportive")),
    ),
    ToyObject(
        "suitcase",
        3,
        4,
        "hallway",
        (
            ("carry", "handle", ("top",), "graspable"),
            ("pack", "body", ("interior",), "containable"),
        ),
    ),
    ToyObject(
        "oven",
        4,
        4,
        "kitchen",
        (("open", "handle", ("top",), "pullable"), ("bake", "cavity", ("interior",), "heatable")),
    ),
    ToyObject("bench", 3, 4, "patio", (("sit", "seat", ("interior",), "sittable"),)),
)

RELATIONAL_ACTIONS: Dict[str, str] = {"pour": "mug"}

INTENTS: Dict[Tuple[str, str], str] = {
    ("mug", "hold"): "I want to keep my hot coffee steady without burning my fingers",
    ("mug", "drink"): "I am really thirsty and want some of my coffee right now",
    ("kettle", "pour"): "I would like to fill my cup with hot water for tea",
    ("kettle", "lift"): "I need to move this heavy thing full of boiling water off the stove",
    ("bottle", "pour"): "I want some of this juice in my glass before breakfast",
    ("bottle", "squeeze"): "I need to get the last bit of ketchup out for my fries",
    ("knife", "cut"): "I need to divide this loaf of bread into pieces for dinner",
    ("knife", "hold"): "I want to pick up this kitchen tool safely without getting hurt",
    ("chair", "sit"): "I am tired and would like to rest my legs for a while",
    ("chair", "lean"): "I want to relax my spine against something firm while I read",
    ("suitcase", "carry"): "I need to bring my clothes through the airport to the gate",
    ("suitcase", "pack"): "I want to fit all my clothes inside before the trip tomorrow",
    ("oven", "open"): "I want to check whether the roast inside is ready yet",
    ("oven", "bake"): "I would like to make fresh bread for the family tonight",
    ("bench", "sit"): "I am tired from walking and want to rest in the garden",
}

SHARED_POUR_INTENT = "I would like to fill my glass before the guests arrive"

REFERRING_TEMPLATE = "the {part} of the {object}"
REASONING_TEMPLATE = "the {affordance} part of the {object} used to {action}"

SCENE_WORDS: Tuple[str, ...] = ("a", "scene", "kitchen", "patio", "hallway")


class ToyVariant(str, Enum):
    STANDARD = "standard"
    CONTEXT_INFORMATIVE = "context_informative"


def _unique(values) -> Tuple[str, ...]:
    return tuple(dict.fromkeys(values))


def _objects() -> Dict[str, ToyObject]:
    return {obj.name: obj for obj in TOY_OBJECTS}


def toy_vocabularies() -> Vocabularies:
    """Vocabulary sidecar of the toy world, instruction words included."""
    chains = [(obj, chain) for obj in TOY_OBJECTS for chain in obj.chains]
    objects = tuple(obj.name for obj in TOY_OBJECTS)
    actions = _unique(c[0] for _, c in chains)
    parts = _unique(c[1] for _, c in chains)
    affordances = _unique(c[3] for _, c in chains)
    texts = list(INTENTS.values()) + [SHARED_POUR_INTENT]
    for obj, (action, part, _, affordance) in chains:
        fields = {"object": obj.name, "action": action, "part": part, "affordance": affordance}
        texts.append(REFERRING_TEMPLATE.format(**fields))
        texts.append(REASONING_TEMPLATE.format(**fields))
    taken = set(objects + actions + parts + affordances + SCENE_WORDS)
    words = sorted({w for text in texts for w in normalize_words(text)} - taken)
    return Vocabularies(
        objects=objects,
        actions=actions,
        parts=parts,
        affordances=affordances,
        scene_words=SCENE_WORDS,
        words=tuple(words),
        part_regions={
            obj.name: {part: bands for _, part, bands, _ in obj.chains} for obj in TOY_OBJECTS
        },
        object_actions={
            obj.name: tuple(
                ObjectAffordance(action=action, part=part, affordance=affordance)
                for action, part, _, affordance in obj.chains
            )
            for obj in TOY_OBJECTS
        },
        relational_actions=dict(RELATIONAL_ACTIONS),
        object_scenes={obj.name: obj.scene for obj in TOY_OBJECTS},
    )


def candidate_chains(
    placed: Dict[str, Box], vocabularies: Vocabularies
) -> List[Tuple[str, ObjectAffordance]]:
    """Chains that exactly one placed object can serve in this layout."""

    def serves(obj: str, action: str) -> bool:
        if action not in {e.action for e in vocabularies.object_actions.get(obj, ())}:
            return False
        partner = vocabularies.relational_actions.get(action)
        if partner is None:
            return True
        return partner in placed and partner != obj and box_gap(placed[obj], placed[partner]) <= 1

    candidates = []
    for obj in placed:
        for entry in vocabularies.object_actions.get(obj, ()):
            providers = [o for o in placed if serves(o, entry.action)]
            if providers == [obj]:
                candidates.append((obj, entry))
    return candidates


class ToyWorldGenerator:
    """Seeded generator of toy layouts and samples."""

    def __init__(self, seed: int = 0, vocabularies: Optional[Vocabularies] = None):
        self.rng = np.random.default_rng(seed)
        self.vocabularies = vocabularies or toy_vocabularies()
        self.tokenizer = Tokenizer(self.vocabularies)
        self.describer = RuleBasedDescriber(self.vocabularies)
        self._objects = _objects()
        self._chains = [(obj.name, c[0]) for obj in TOY_OBJECTS for c in obj.chains]

    # layout

    def _random_box(self, name: str) -> Box:
        obj = self._objects[name]
        top = int(self.rng.integers(0, GRID_SIZE - obj.rows + 1))
        left = int(self.rng.integers(0, GRID_SIZE - obj.cols + 1))
        return top, top + obj.rows - 1, left, left + obj.cols - 1

    def _place(self, placed: Dict[str, Box], name: str, near=None, far=None) -> bool:
        """Place an object clear of the others.

        ``near`` demands a gap of exactly one cell to that object, ``far`` at least two.
        """
        for _ in range(MAX_ATTEMPTS // 10):
            box = self._random_box(name)
            if any(box_gap(box, other) < 1 for other in placed.values()):
                continue
            if near is not None and box_gap(box, placed[near]) != 1:
                continue
            if far is not None and box_gap(box, placed[far]) < 2:
                continue
            placed[name] = box
            return True
        return False

    def render(self, placed: Dict[str, Box]) -> GridImage:
        cells = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.int64)
        for name, (top, bottom, left, right) in placed.items():
            cells[top : bottom + 1, left : right + 1] = self.tokenizer.object_id(name)
        return GridImage(
            width=GRID_SIZE,
            height=GRID_SIZE,
            cells=cells,
            feature_dim=self.vocabularies.feature_dim,
        )

    def standard_layout(self, target: Tuple[str, str]) -> Dict[str, Box]:
        """A layout where the target (object, action) chain is unambiguous."""
        obj, action = target
        partner = self.vocabularies.relational_actions.get(action)
        for _ in range(MAX_ATTEMPTS):
            placed: Dict[str, Box] = {}
            self._place(placed, obj)
            if partner and not self._place(placed, partner, near=obj):
                continue
            distractors = [
                name
                for name in self._objects
                if name not in placed
                and action not in {c[0] for c in self._objects[name].chains}
            ]
            wanted = int(self.rng.integers(1, 3)) if not partner else int(self.rng.integers(0, 2))
            for name in self.rng.permutation(distractors)[:wanted]:
                self._place(placed, str(name))
            if len(placed) < 2:
                continue
            candidates = candidate_chains(placed, self.vocabularies)
            if any(o == obj and e.action == action for o, e in candidates):
                return placed
        raise RuntimeError(f"could not lay out a scene for {target}")

    def context_informative_layout(self) -> Tuple[Dict[str, Box], str]:
        """Mug with a kettle and a bottle, only one of them next to the mug."""
        for _ in range(MAX_ATTEMPTS):
            near, far = ("kettle", "bottle") if self.rng.random() < 0.5 else ("bottle", "kettle")
            placed: Dict[str, Box] = {}
            self._place(placed, "mug")
            if not self._place(placed, near, near="mug"):
                continue
            if not self._place(placed, far, far="mug"):
                continue
            return placed, near
        raise RuntimeError("could not lay out a context-informative scene")

    # samples

    def _instructions(
        self, obj: str, entry: ObjectAffordance, shared_intent: bool
    ) -> Dict[InstructionKind, Instruction]:
        fields = {
            "object": obj,
            "action": entry.action,
            "part": entry.part,
            "affordance": entry.affordance,
        }
        texts = {
            InstructionKind.REFERRING: REFERRING_TEMPLATE.format(**fields),
            InstructionKind.REASONING: REASONING_TEMPLATE.format(**fields),
            InstructionKind.INTENT: (
                SHARED_POUR_INTENT if shared_intent else INTENTS[(obj, entry.action)]
            ),
        }
        return {
            kind: Instruction(text=tuple(normalize_words(text)), kind=kind, raw=text)
            for kind, text in texts.items()
        }

    def make_sample(
        self,
        sample_id: str,
        base_image_id: str,
        split: str,
        placed: Dict[str, Box],
        obj: str,
        entry: ObjectAffordance,
        shared_intent: bool = False,
    ) -> Sample:
        image = self.render(placed)
        return Sample(
            id=sample_id,
            base_image_id=base_image_id,
            split=split,
            image=image,
            instructions=self._instructions(obj, entry, shared_intent),
            chain=ReasoningChain(
                object=obj, action=entry.action, part=entry.part, affordance=entry.affordance
            ),
            mask_gt=region_mask(image, self.tokenizer, obj, entry.part),
            observation=self.describer.describe(image) if split == "train" else None,
        )

    def entry_for(self, obj: str, action: str) -> ObjectAffordance:
        return next(e for e in self.vocabularies.object_actions[obj] if e.action == action)

    def layout(self, index: int, variant: ToyVariant) -> Tuple[Dict[str, Box], str, str]:
        """Layout plus its target (object, action) for the index-th base image."""
        if variant == ToyVariant.CONTEXT_INFORMATIVE:
            placed, target = self.context_informative_layout()
            return placed, target, "pour"
        obj, action = self._chains[index % len(self._chains)]
        return self.standard_layout((obj, action)), obj, action


def generate_toy_dataset(
    train: int = 32,
    test: int = 16,
    overlap_fraction: float = 0.25,
    seed: int = 0,
    variant: Union[ToyVariant, str] = ToyVariant.STANDARD,
) -> List[Sample]:
    """Train samples on fresh base images, then test samples.

    About ``overlap_fraction`` of the test samples reuse a training base image
    with one of its unambiguous chains; the rest get base images of their own.
    """
    if not 0.0 <= overlap_fraction <= 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1]")
    variant = ToyVariant(variant)
    generator = ToyWorldGenerator(seed)
    shared = variant == ToyVariant.CONTEXT_INFORMATIVE
    samples: List[Sample] = []
    layouts: List[Tuple[str, Dict[str, Box]]] = []
    base = 0

    def fresh(index: int, split: str, number: int) -> Sample:
        nonlocal base
        placed, obj, action = generator.layout(index, variant)
        base_id = f"base-{base:04d}"
        base += 1
        layouts.append((base_id, placed))
        return generator.make_sample(
            f"toy-{split}-{number:04d}",
            base_id,
            split,
            placed,
            obj,
            generator.entry_for(obj, action),
            shared_intent=shared and action == "pour",
        )

    for i in range(train):
        samples.append(fresh(i, "train", i))
    train_layouts = list(layouts)
    overlap = int(round(test * overlap_fraction)) if train_layouts else 0
    for j in range(test):
        if j < overlap:
            base_id, placed = train_layouts[int(generator.rng.integers(0, len(train_layouts)))]
            candidates = candidate_chains(placed, generator.vocabularies)
            if shared:
                candidates = [c for c in candidates if c[1].action == "pour"]
            obj, entry = candidates[int(generator.rng.integers(0, len(candidates)))]
            samples.append(
                generator.make_sample(
                    f"toy-test-{j:04d}",
                    base_id,
                    "test",
                    placed,
                    obj,
                    entry,
                    shared_intent=shared and entry.action == "pour",
                )
            )
        else:
            samples.append(fresh(train + j, "test", j))
    logger.info(
        f"Generated {train} train and {test} test toy samples "
        f"({variant.value}, {overlap} overlapping)"
    )
    return samples


def write_toy_dataset(
    path: Union[str, Path],
    samples: Sequence[Sample],
    vocabularies: Optional[Vocabularies] = None,
) -> Path:
    """Write samples as JSON lines next to their vocabulary sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for sample in samples:
            f.write(json.dumps(sample_to_record(sample), sort_keys=True) + "\n")
    write_vocabularies(vocabularies or toy_vocabularies(), sidecar_path(path))
    logger.info(f"Wrote {len(samples)} samples to {path}")
    return path
