"""Image-only observation generators for Stage-0 supervision."""

import logging
from abc import ABC, abstractmethod
from collections import Counter
from typing import Any, Dict, List, Mapping, Tuple, Union

import networkx as nx
from pydantic import ValidationError

from ..exceptions import GeneratorFailure, SegWorldError
from ..features import bounding_box
from ..models import GridImage, SceneContext, Vocabularies
from ..sequences import LevelBudgets
from ..tokenizer import Tokenizer

logger = logging.getLogger(__name__)

Box = Tuple[int, int, int, int]


class ObservationGenerator(ABC):
    """Describes an image; never sees an instruction."""

    @abstractmethod
    def generate(self, image: GridImage) -> Union[SceneContext, Mapping[str, Any]]:
        """Return a scene context or its raw four-field mapping."""


def box_gap(a: Box, b: Box) -> int:
    """Chebyshev distance in empty cells between two bounding boxes."""
    row_gap = max(0, b[0] - a[1] - 1, a[0] - b[1] - 1)
    col_gap = max(0, b[2] - a[3] - 1, a[2] - b[3] - 1)
    return max(row_gap, col_gap)


def relation(a: Box, b: Box) -> str:
    """Spatial relation of a to b by bounding-box centres; horizontal wins ties."""
    dr = (b[0] + b[1]) / 2 - (a[0] + a[1]) / 2
    dc = (b[2] + b[3]) / 2 - (a[2] + a[3]) / 2
    if abs(dc) >= abs(dr):
        return "left_of" if dc > 0 else "right_of"
    return "above" if dr > 0 else "below"


class RuleBasedDescriber(ObservationGenerator):
    """Deterministic grid describer.

    Objects within one cell of each other are adjacent. Events list every
    unconditional action of a present object, plus relational actions whose
    partner object is adjacent to it.
    """

    def __init__(self, vocabularies: Vocabularies, max_gap: int = 1):
        self.vocabularies = vocabularies
        self.tokenizer = Tokenizer(vocabularies)
        self.max_gap = max_gap
        self.budgets = LevelBudgets()

    def adjacency(self, image: GridImage) -> nx.Graph:
        graph = nx.Graph()
        boxes: Dict[str, Box] = {}
        for token_id in image.object_tokens():
            if not self.tokenizer.is_object(token_id):
                continue
            name = self.tokenizer.object_name(token_id)
            boxes[name] = bounding_box(image.cells, token_id)
            graph.add_node(name, box=boxes[name], order=len(boxes) - 1)
        names = list(boxes)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                if box_gap(boxes[a], boxes[b]) <= self.max_gap:
                    graph.add_edge(a, b)
        return graph

    def _scene(self, objects: List[str]) -> Tuple[str, ...]:
        known = self.vocabularies.object_scenes
        scenes = [known[o] for o in objects if o in known]
        if not scenes:
            return ()
        counts = Counter(scenes)
        best = max(counts.values())
        scene = next(s for s in scenes if counts[s] == best)
        return ("a", scene, "scene")

    def events(self, graph: nx.Graph) -> List[Tuple[str, str]]:
        events: List[Tuple[str, str]] = []
        for obj in graph.nodes:
            for entry in self.vocabularies.object_actions.get(obj, ()):
                partner = self.vocabularies.relational_actions.get(entry.action)
                if partner is not None and not graph.has_edge(obj, partner):
                    continue
                if (entry.action, obj) not in events:
                    events.append((entry.action, obj))
        return events

    def describe(self, image: GridImage) -> SceneContext:
        graph = self.adjacency(image)
        objects = list(graph.nodes)[: self.budgets.objects]
        order = nx.get_node_attributes(graph, "order")
        boxes = nx.get_node_attributes(graph, "box")
        relations = []
        for a, b in sorted(graph.edges, key=lambda e: sorted(order[n] for n in e)):
            if a not in objects or b not in objects:
                continue
            if order[a] > order[b]:
                a, b = b, a
            relations.append((a, relation(boxes[a], boxes[b]), b))
        events = [e for e in self.events(graph) if e[1] in objects]
        return SceneContext(
            scene=self._scene(objects),
            objects=tuple(objects),
            relations=tuple(relations[: self.budgets.relations // 3]),
            events=tuple(events[: self.budgets.events // 2]),
        )

    def generate(self, image: GridImage) -> SceneContext:
        return self.describe(image)

    def describe_all(self, image: GridImage) -> List[SceneContext]:
        """Single-element list, the form the stub backbone's observer expects."""
        return [self.describe(image)]


def synthesize_observation(image: GridImage, generator: ObservationGenerator) -> SceneContext:
    """Run a generator and validate its output as a four-field scene context."""
    try:
        raw = generator.generate(image)
    except SegWorldError:
        raise
    except Exception as e:
        raise GeneratorFailure(f"generator {type(generator).__name__} failed: {e}") from e
    if isinstance(raw, SceneContext):
        context = raw
    else:
        try:
            context = SceneContext.model_validate(raw)
        except ValidationError as e:
            raise GeneratorFailure(f"generator output is not a scene context: {e}") from e
    if not context.is_valid_supervision:
        logger.warning("Synthesized observation lists no objects; not valid as supervision")
    return context
