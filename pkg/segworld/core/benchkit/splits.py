"""Leakage-aware split construction."""

import logging
from typing import Dict, Iterable, List

from ..exceptions import MissingBaseImageId
from ..models import DatasetSplit, Sample

logger = logging.getLogger(__name__)


def build_splits(samples: Iterable[Sample]) -> DatasetSplit:
    """Partition the official test split by whether its base image was seen in training.

    Ids are sorted, so the result does not depend on input order.
    """
    samples = list(samples)
    for sample in samples:
        if not sample.base_image_id:
            raise MissingBaseImageId(f"sample {sample.id} has no base_image_id")

    train = [s for s in samples if s.split == "train"]
    test = [s for s in samples if s.split == "test"]
    train_bases = {s.base_image_id for s in train}
    clean = sorted(s.id for s in test if s.base_image_id not in train_bases)
    overlap = sorted(s.id for s in test if s.base_image_id in train_bases)
    split = DatasetSplit(
        train=tuple(sorted(s.id for s in train)),
        test_official=tuple(sorted(s.id for s in test)),
        test_clean=tuple(clean),
        test_overlap=tuple(overlap),
    )
    logger.info(
        f"Built splits: train={len(split.train)} test_official={len(split.test_official)} "
        f"test_clean={len(split.test_clean)} test_overlap={len(split.test_overlap)}"
    )
    return split


def split_counts(split: DatasetSplit) -> Dict[str, int]:
    return {
        "train": len(split.train),
        "test_official": len(split.test_official),
        "test_clean": len(split.test_clean),
        "test_overlap": len(split.test_overlap),
    }


def leakage_summary(samples: Iterable[Sample]) -> Dict[str, object]:
    """Base images shared between train and the official test split."""
    samples = list(samples)
    train_bases = {s.base_image_id for s in samples if s.split == "train"}
    test_bases = {s.base_image_id for s in samples if s.split == "test"}
    shared: List[str] = sorted(b for b in train_bases & test_bases if b)
    return {
        "train_bases": len(train_bases),
        "test_bases": len(test_bases),
        "shared_bases": len(shared),
        "shared_base_ids": shared,
    }
