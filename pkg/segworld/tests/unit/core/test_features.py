import numpy as np

from segworld.core.features import (
    BAND_INDEX,
    band_map,
    bounding_box,
    encode_features,
    feature_indices,
    part_bands,
    pooled_region_feature,
    region_mask,
)
from segworld.core.models import BinaryMask
from segworld.tests.factories import KETTLE_BOX, MUG_BOX, grid


class TestBands:
    """Test suite for the five-band split of object boxes."""

    def test_band_priority(self):
        """Test a 3x3 mug: full top and bottom rows, one cell each for the rest."""
        image = grid({"mug": MUG_BOX})

        bands = band_map(image)

        assert bands[0, :3].tolist() == [BAND_INDEX["top"]] * 3
        assert bands[2, :3].tolist() == [BAND_INDEX["bottom"]] * 3
        assert bands[1, :3].tolist() == [
            BAND_INDEX["left"],
            BAND_INDEX["interior"],
            BAND_INDEX["right"],
        ]
        assert (bands[3:, :] == -1).all()

    def test_bounding_box(self, tokenizer):
        image = grid({"kettle": KETTLE_BOX})

        assert bounding_box(image.cells, tokenizer.object_id("kettle")) == KETTLE_BOX
        assert bounding_box(image.cells, tokenizer.object_id("mug")) is None


class TestFeatures:
    """Test suite for the frozen one-hot cell features."""

    def test_one_hot_per_object_cell(self, tokenizer, vocabularies):
        image = grid({"mug": MUG_BOX, "kettle": KETTLE_BOX})

        features = encode_features(image, tokenizer)

        assert features.shape == (8, 8, vocabularies.feature_dim)
        assert features.dtype == np.float32
        object_cells = image.cells > 0
        assert (features[object_cells].sum(axis=-1) == 1).all()
        assert (features[~object_cells] == 0).all()

    def test_channel_layout(self, tokenizer):
        image = grid({"mug": MUG_BOX, "kettle": KETTLE_BOX})

        features = encode_features(image, tokenizer)

        assert features[1, 1].argmax() == BAND_INDEX["interior"]
        assert features[1, 4].argmax() == 1 * 5 + BAND_INDEX["left"]
        assert feature_indices(tokenizer, "kettle", ("left",)) == [5 + BAND_INDEX["left"]]


class TestRegions:
    """Test suite for part regions and pooled features."""

    def test_part_region(self, tokenizer):
        image = grid({"mug": MUG_BOX, "kettle": KETTLE_BOX})

        handle = region_mask(image, tokenizer, "mug", "handle")
        rim = region_mask(image, tokenizer, "mug", "rim")

        assert part_bands(tokenizer, "mug", "handle") == ("right",)
        assert np.argwhere(handle.bits).tolist() == [[1, 2]]
        assert rim.foreground == 3
        assert rim.bits[0, :3].all()

    def test_missing_object_or_part(self, tokenizer):
        image = grid({"mug": MUG_BOX})

        assert region_mask(image, tokenizer, "kettle", "spout").foreground == 0
        assert region_mask(image, tokenizer, "mug", "spout").foreground == 0
        assert region_mask(image, tokenizer, "zeppelin", "fin").foreground == 0
        assert part_bands(tokenizer, "mug", "spout") == ()

    def test_pooled_feature(self, tokenizer):
        image = grid({"mug": MUG_BOX})
        features = encode_features(image, tokenizer)

        pooled = pooled_region_feature(features, region_mask(image, tokenizer, "mug", "handle"))
        empty = pooled_region_feature(features, BinaryMask.empty(8, 8))

        assert pooled.argmax() == BAND_INDEX["right"]
        assert pooled.sum() == 1.0
        assert (empty == 0).all()
