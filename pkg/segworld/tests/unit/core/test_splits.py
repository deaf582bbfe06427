import random

import pytest

from segworld.core.benchkit.splits import build_splits, leakage_summary, split_counts
from segworld.core.exceptions import MissingBaseImageId
from segworld.tests.factories import make_sample


@pytest.fixture(scope="module")
def samples():
    return [
        make_sample("a", base_image_id="b1", split="train"),
        make_sample("c", base_image_id="b2", split="test"),
        make_sample("b", base_image_id="b1", split="test"),
        make_sample("d", base_image_id="b3", split="test"),
        make_sample("e", base_image_id="b4", split="train"),
    ]


class TestBuildSplits:
    """Test suite for leakage-aware split construction."""

    def test_partition(self, samples):
        # Act
        split = build_splits(samples)

        # Assert
        assert split.train == ("a", "e")
        assert split.test_official == ("b", "c", "d")
        assert split.test_clean == ("c", "d")
        assert split.test_overlap == ("b",)

    def test_order_independent(self, samples):
        shuffled = list(samples)
        random.Random(7).shuffle(shuffled)

        assert build_splits(shuffled) == build_splits(samples)

    def test_counts(self, samples):
        assert split_counts(build_splits(samples)) == {
            "train": 2,
            "test_official": 3,
            "test_clean": 2,
            "test_overlap": 1,
        }

    @pytest.mark.parametrize("base", [None, ""])
    def test_missing_base_image_id(self, samples, base):
        with pytest.raises(MissingBaseImageId):
            build_splits(samples + [make_sample("x", base_image_id=base, split="test")])

    def test_no_training_samples(self):
        split = build_splits([make_sample("t", base_image_id="b1", split="test")])

        assert split.train == ()
        assert split.test_clean == ("t",)
        assert split.test_overlap == ()


class TestLeakageSummary:
    def test_shared_bases(self, samples):
        assert leakage_summary(samples) == {
            "train_bases": 2,
            "test_bases": 3,
            "shared_bases": 1,
            "shared_base_ids": ["b1"],
        }
