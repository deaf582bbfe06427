"""Per-split, per-instruction-kind evaluation through the inference engine."""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from segworld.core.backbones import BackboneType, create_backbone
from segworld.core.benchkit.observation import RuleBasedDescriber
from segworld.core.concurrency import run_limited
from segworld.core.engine import SegWorldEngine
from segworld.core.metrics import make_record, summarize
from segworld.core.model import SegWorldModel
from segworld.core.models import (
    DatasetSplit,
    EvalRecord,
    InstructionKind,
    MetricsReport,
    ReasoningChain,
    Sample,
    Vocabularies,
)
from segworld.core.settings import settings
from segworld.core.tokenizer import Tokenizer

from .worker_base import Worker

logger = logging.getLogger(__name__)

SPLIT_NAMES: Dict[str, str] = {"official": "test_official", "clean": "test_clean"}


@dataclass
class EvaluationOutcome:
    split: str
    kind: InstructionKind
    records: List[EvalRecord] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def report(self) -> Optional[MetricsReport]:
        return summarize(self.records) if self.records else None

    @property
    def stem(self) -> str:
        return f"{self.split}_{self.kind.value}"

    def as_dict(self, manifest_hash: Optional[str] = None) -> Dict[str, Any]:
        report = self.report
        return {
            "split": self.split,
            "kind": self.kind.value,
            "manifest_hash": manifest_hash,
            "metrics": report.model_dump(mode="json") if report else None,
            "skipped": sorted(self.skipped),
        }

    def summary_row(self) -> Dict[str, Any]:
        report = self.report
        return {
            "split": self.split,
            "kind": self.kind.value,
            "count": report.count if report else 0,
            "miou": report.miou if report else None,
            "ciou": report.ciou if report else None,
            "seg_rate": report.seg_rate if report else None,
            "skipped": len(self.skipped),
        }


def oracle_chains(samples: Sequence[Sample]) -> Tuple[Dict[Tuple[str, ...], ReasoningChain], int]:
    """Instruction-to-chain table; instructions shared by different chains are left out."""
    table: Dict[Tuple[str, ...], ReasoningChain] = {}
    ambiguous = set()
    for sample in samples:
        for instruction in sample.instructions.values():
            key = instruction.text
            if key in table and table[key] != sample.chain:
                ambiguous.add(key)
            table.setdefault(key, sample.chain)
    for key in ambiguous:
        del table[key]
    return table, len(ambiguous)


def build_oracle_model(samples: Sequence[Sample], vocabularies: Vocabularies) -> SegWorldModel:
    """Stub-backbone model that answers every unambiguous instruction of the dataset exactly."""
    tokenizer = Tokenizer(vocabularies)
    chains, ambiguous = oracle_chains(samples)
    if ambiguous:
        logger.warning(f"Oracle leaves out {ambiguous} instructions shared by different chains")
    describer = RuleBasedDescriber(vocabularies)
    backbone = create_backbone(
        BackboneType.STUB, tokenizer, chains=chains, observer=describer.describe_all
    )
    return SegWorldModel.oracle(backbone)


def select_split(samples: Sequence[Sample], split: DatasetSplit, name: str) -> List[Sample]:
    wanted = set(split.ids(SPLIT_NAMES.get(name, name)))
    return [s for s in samples if s.id in wanted]


class EvaluationWorker(Worker):
    """Segments samples in parallel and aggregates EvalRecords."""

    def __init__(self, engine: SegWorldEngine, max_concurrency: Optional[int] = None):
        self.engine = engine
        self.max_concurrency = max_concurrency or settings.max_concurrency

    def evaluate_sample(self, sample: Sample, kind: InstructionKind) -> EvalRecord:
        result = self.engine.segment(sample.image, sample.instructions[kind], sample.id)
        return make_record(
            sample.id,
            sample.chain.action,
            result.mask if result.emitted_seg else None,
            sample.mask_gt,
        )

    def evaluate(
        self, samples: Sequence[Sample], kind: InstructionKind, split: str = "all"
    ) -> EvaluationOutcome:
        outcome = EvaluationOutcome(split=split, kind=kind)
        present = []
        for sample in samples:
            if kind in sample.instructions:
                present.append(sample)
            else:
                outcome.skipped.append(sample.id)
        if outcome.skipped:
            logger.info(
                f"Skipping {len(outcome.skipped)} samples without a {kind.value} instruction"
            )
        self.engine.model.eval()
        outcome.records = run_limited(
            lambda sample: self.evaluate_sample(sample, kind), present, self.max_concurrency
        )
        report = outcome.report
        if report:
            logger.info(
                f"{split}/{kind.value}: miou={report.miou:.4f} ciou={report.ciou:.4f} "
                f"seg_rate={report.seg_rate:.4f} n={report.count}"
            )
        return outcome

    def execute(
        self,
        samples_by_split: Mapping[str, Sequence[Sample]],
        kinds: Sequence[InstructionKind],
        output_dir: Optional[Path] = None,
        manifest_hash: Optional[str] = None,
    ) -> List[EvaluationOutcome]:
        outcomes = [
            self.evaluate(samples, kind, split)
            for split, samples in samples_by_split.items()
            for kind in kinds
        ]
        if output_dir is not None:
            for outcome in outcomes:
                write_outcome(outcome, Path(output_dir), manifest_hash)
        return outcomes


def write_outcome(outcome: EvaluationOutcome, output_dir: Path, manifest_hash: Optional[str]):
    """metrics_<split>_<kind>.json, per_action_<split>_<kind>.csv and the per-sample records."""
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / f"metrics_{outcome.stem}.json").write_text(
        json.dumps(outcome.as_dict(manifest_hash), indent=2, sort_keys=True) + "\n"
    )
    with open(output_dir / f"records_{outcome.stem}.jsonl", "w") as f:
        for record in sorted(outcome.records, key=lambda r: r.sample_id):
            f.write(json.dumps(record.model_dump(mode="json"), sort_keys=True) + "\n")
    report = outcome.report
    with open(output_dir / f"per_action_{outcome.stem}.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["action", "count", "miou"])
        if report:
            for action in sorted(report.per_action):
                stats = report.per_action[action]
                writer.writerow([action, stats.count, f"{stats.miou:.6f}"])
