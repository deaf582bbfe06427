"""Frozen per-cell image features.

Every object instance's bounding box is split into five bands with priority
top > bottom > left > right > interior. A cell's feature is the one-hot of
(object index, band); background cells are all zero.
"""

import logging
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .models import BANDS, BinaryMask, GridImage
from .tokenizer import Tokenizer

logger = logging.getLogger(__name__)

BAND_INDEX: Dict[str, int] = {band: i for i, band in enumerate(BANDS)}


def bounding_box(cells: np.ndarray, token_id: int) -> Optional[Tuple[int, int, int, int]]:
    """(top, bottom, left, right) inclusive bounds of a token, None if absent."""
    rows, cols = np.nonzero(cells == token_id)
    if rows.size == 0:
        return None
    return int(rows.min()), int(rows.max()), int(cols.min()), int(cols.max())


def band_map(image: GridImage) -> np.ndarray:
    """Band index per cell, -1 for background."""
    bands = np.full(image.cells.shape, -1, dtype=np.int64)
    for token_id in image.object_tokens():
        top, bottom, left, right = bounding_box(image.cells, token_id)
        for r in range(top, bottom + 1):
            for c in range(left, right + 1):
                if image.cells[r, c] != token_id:
                    continue
                if r == top:
                    band = "top"
                elif r == bottom:
                    band = "bottom"
                elif c == left:
                    band = "left"
                elif c == right:
                    band = "right"
                else:
                    band = "interior"
                bands[r, c] = BAND_INDEX[band]
    return bands


def encode_features(image: GridImage, tokenizer: Tokenizer) -> np.ndarray:
    """(height, width, feature_dim) float32 one-hot features."""
    feature_dim = len(tokenizer.vocabularies.objects) * len(BANDS)
    features = np.zeros((image.height, image.width, feature_dim), dtype=np.float32)
    bands = band_map(image)
    for r, c in zip(*np.nonzero(bands >= 0)):
        index = tokenizer.object_index(image.cells[r, c])
        if index < 0:
            logger.debug(f"Cell ({r}, {c}) holds non-object token {image.cells[r, c]}")
            continue
        features[r, c, index * len(BANDS) + bands[r, c]] = 1.0
    return features


def feature_indices(tokenizer: Tokenizer, obj: str, bands: Iterable[str]) -> list:
    """Feature channels of the given bands of one object."""
    base = tokenizer.vocabularies.objects.index(obj) * len(BANDS)
    return [base + BAND_INDEX[band] for band in bands]


def part_bands(tokenizer: Tokenizer, obj: str, part: str) -> Tuple[str, ...]:
    return tuple(tokenizer.vocabularies.part_regions.get(obj, {}).get(part, ()))


def region_mask(image: GridImage, tokenizer: Tokenizer, obj: str, part: str) -> BinaryMask:
    """Cells covered by the bands of an object's part."""
    bits = np.zeros(image.cells.shape, dtype=bool)
    if obj in tokenizer.vocabularies.objects:
        bands = band_map(image)
        object_cells = image.cells == tokenizer.object_id(obj)
        for band in part_bands(tokenizer, obj, part):
            bits |= object_cells & (bands == BAND_INDEX[band])
    return BinaryMask.from_array(bits)


def pooled_region_feature(features: np.ndarray, region: BinaryMask) -> np.ndarray:
    """Mean feature over a region's cells."""
    cells = features[region.bits]
    if cells.shape[0] == 0:
        return np.zeros(features.shape[-1], dtype=features.dtype)
    return cells.mean(axis=0)
