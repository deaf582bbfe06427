from unittest.mock import MagicMock, patch

import pytest

from segworld.core.benchkit.observation import (
    ObservationGenerator,
    RuleBasedDescriber,
    box_gap,
    relation,
    synthesize_observation,
)
from segworld.core.exceptions import GeneratorFailure, SegWorldError
from segworld.core.models import SceneContext
from segworld.tests.factories import KETTLE_BOX, MUG_BOX, VOCABULARIES, grid


class FixedGenerator(ObservationGenerator):
    def __init__(self, output):
        self.output = output

    def generate(self, image):
        if isinstance(self.output, Exception):
            raise self.output
        return self.output


@pytest.fixture
def describer():
    return RuleBasedDescriber(VOCABULARIES)


class TestGeometry:
    """Test suite for box gaps and spatial relations."""

    @pytest.mark.parametrize(
        "a,b,expected",
        [
            (MUG_BOX, KETTLE_BOX, 1),
            (MUG_BOX, (5, 7, 4, 7), 2),
            ((0, 1, 0, 1), (2, 3, 2, 3), 0),
            (KETTLE_BOX, MUG_BOX, 1),
        ],
    )
    def test_box_gap(self, a, b, expected):
        assert box_gap(a, b) == expected

    def test_relation(self):
        assert relation(MUG_BOX, KETTLE_BOX) == "left_of"
        assert relation(KETTLE_BOX, MUG_BOX) == "right_of"
        assert relation((0, 1, 0, 1), (4, 5, 0, 1)) == "above"
        assert relation((4, 5, 0, 1), (0, 1, 0, 1)) == "below"

    def test_horizontal_wins_ties(self):
        assert relation((0, 1, 0, 1), (4, 5, 4, 5)) == "left_of"


class TestRuleBasedDescriber:
    """Test suite for the deterministic grid describer."""

    def test_adjacent_objects(self, describer):
        # Act
        context = describer.describe(grid({"mug": MUG_BOX, "kettle": KETTLE_BOX}))

        # Assert
        assert context.scene == ("a", "kitchen", "scene")
        assert context.objects == ("mug", "kettle")
        assert context.relations == (("mug", "left_of", "kettle"),)
        assert context.events == (
            ("hold", "mug"),
            ("drink", "mug"),
            ("pour", "kettle"),
            ("lift", "kettle"),
        )

    def test_distant_objects(self, describer):
        """Test that a relational action needs its partner next to the object."""
        context = describer.describe(grid({"mug": MUG_BOX, "kettle": (5, 7, 4, 7)}))

        assert context.relations == ()
        assert ("pour", "kettle") not in context.events
        assert ("lift", "kettle") in context.events

    def test_wider_gap(self):
        describer = RuleBasedDescriber(VOCABULARIES, max_gap=2)

        context = describer.describe(grid({"mug": MUG_BOX, "kettle": (5, 7, 4, 7)}))

        assert context.relations == (("mug", "above", "kettle"),)

    def test_empty_image(self, describer):
        context = describer.describe(grid({}))

        assert context.is_empty

    def test_majority_scene(self, describer):
        context = describer.describe(grid({"chair": (0, 3, 0, 2), "bench": (5, 7, 4, 7)}))

        assert context.scene == ("a", "patio", "scene")

    def test_describe_all(self, describer):
        image = grid({"mug": MUG_BOX, "kettle": KETTLE_BOX})

        assert describer.describe_all(image) == [describer.generate(image)]

    def test_adjacency_graph(self, describer):
        graph = describer.adjacency(grid({"mug": MUG_BOX, "kettle": KETTLE_BOX}))

        assert graph.has_edge("mug", "kettle")
        assert graph.nodes["mug"]["box"] == MUG_BOX


class TestSynthesizeObservation:
    """Test suite for generator output validation."""

    def test_mapping_validated(self):
        raw = {
            "scene": ["a", "kitchen", "scene"],
            "objects": ["mug"],
            "relations": [],
            "events": [["hold", "mug"]],
        }

        context = synthesize_observation(grid({}), FixedGenerator(raw))

        assert context.objects == ("mug",)
        assert context.events == (("hold", "mug"),)

    def test_invalid_mapping(self):
        with pytest.raises(GeneratorFailure):
            synthesize_observation(grid({}), FixedGenerator({"scene": "oops"}))

    def test_generator_error_wrapped(self):
        with pytest.raises(GeneratorFailure) as e:
            synthesize_observation(grid({}), FixedGenerator(ValueError("boom")))

        assert isinstance(e.value.__cause__, ValueError)

    def test_segworld_errors_pass_through(self):
        error = SegWorldError("inner")

        with pytest.raises(SegWorldError) as e:
            synthesize_observation(grid({}), FixedGenerator(error))

        assert e.value is error

    def test_no_objects_warns(self):
        with patch("segworld.core.benchkit.observation.logger") as mock_logger:
            context = synthesize_observation(grid({}), FixedGenerator(SceneContext.empty()))

        assert not context.is_valid_supervision
        mock_logger.warning.assert_called_once()

    def test_generator_sees_only_the_image(self):
        generator = MagicMock(spec=ObservationGenerator)
        generator.generate.return_value = SceneContext.empty()
        image = grid({"mug": MUG_BOX})

        synthesize_observation(image, generator)

        generator.generate.assert_called_once_with(image)
