"""Mask-overlap metrics and aggregate evaluation reports."""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatch, EmptyEvaluation
from .models import ActionStats, BinaryMask, EvalRecord, MetricsReport

logger = logging.getLogger(__name__)

THRESHOLD = 0.5


def binarize(probabilities: np.ndarray, threshold: float = THRESHOLD) -> BinaryMask:
    """Strict threshold: a cell at exactly 0.5 is background."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    return BinaryMask.from_array(probabilities > threshold)


def overlap(pred: BinaryMask, gt: BinaryMask) -> Tuple[int, int]:
    """(intersection, union) cell counts."""
    if pred.bits.shape != gt.bits.shape:
        raise DimensionMismatch(f"prediction {pred.bits.shape} vs ground truth {gt.bits.shape}")
    intersection = int(np.logical_and(pred.bits, gt.bits).sum())
    union = int(np.logical_or(pred.bits, gt.bits).sum())
    return intersection, union


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    intersection, union = overlap(pred, gt)
    if union == 0:
        return 0.0
    return intersection / union


def make_record(
    sample_id: str, action: str, pred: Optional[BinaryMask], gt: BinaryMask
) -> EvalRecord:
    """Score one prediction; None means the model emitted no [SEG]."""
    if pred is None:
        return EvalRecord(
            sample_id=sample_id,
            action=action,
            emitted_seg=False,
            iou=0.0,
            intersection=0,
            union=gt.foreground,
        )
    intersection, union = overlap(pred, gt)
    return EvalRecord(
        sample_id=sample_id,
        action=action,
        emitted_seg=True,
        iou=intersection / union if union else 0.0,
        intersection=intersection,
        union=union,
    )


def _require(records: Sequence[EvalRecord]) -> Sequence[EvalRecord]:
    if not records:
        raise EmptyEvaluation("no evaluation records")
    return records


def miou(records: Sequence[EvalRecord]) -> float:
    _require(records)
    return float(np.mean([record.iou for record in records]))


def ciou(records: Sequence[EvalRecord]) -> float:
    _require(records)
    union = sum(record.union for record in records)
    if union == 0:
        return 0.0
    return sum(record.intersection for record in records) / union


def seg_emission_rate(records: Sequence[EvalRecord]) -> float:
    _require(records)
    return sum(1 for record in records if record.emitted_seg) / len(records)


def per_action_miou(records: Sequence[EvalRecord]) -> Dict[str, ActionStats]:
    _require(records)
    groups: Dict[str, List[float]] = defaultdict(list)
    for record in records:
        groups[record.action].append(record.iou)
    return {
        action: ActionStats(count=len(values), miou=float(np.mean(values)))
        for action, values in sorted(groups.items())
    }


def summarize(records: Iterable[EvalRecord]) -> MetricsReport:
    records = list(records)
    _require(records)
    report = MetricsReport(
        miou=miou(records),
        ciou=ciou(records),
        seg_rate=seg_emission_rate(records),
        count=len(records),
        per_action=per_action_miou(records),
    )
    logger.debug(
        "Summarized %d records: miou=%.4f ciou=%.4f seg_rate=%.4f",
        report.count,
        report.miou,
        report.ciou,
        report.seg_rate,
    )
    return report
