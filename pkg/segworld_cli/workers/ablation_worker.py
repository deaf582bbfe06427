import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from segworld.core.caching.no_cache import NoCache
from segworld.core.engine import SegWorldEngine
from segworld.core.models import InstructionKind, Sample, TrainConfig, Vocabularies

from .evaluation_worker import EvaluationWorker
from .training_worker import TrainingWorker
from .worker_base import Worker

logger = logging.getLogger(__name__)

# (directory, row label, config flags)
ABLATION_VARIANTS: Tuple[Tuple[str, str, Dict[str, bool]], ...] = (
    ("full", "full", {}),
    ("no_events", "w/o event level", {"drop_events": True}),
    ("no_context", "w/o proactive context", {"drop_context": True}),
    ("no_cot", "w/o Stage-1 CoT", {"drop_stage1_cot": True}),
)


class AblationWorker(Worker):
    """Trains and evaluates the four ablation variants from one base config."""

    def __init__(self, max_concurrency: Optional[int] = None):
        self.training_worker = TrainingWorker()
        self.max_concurrency = max_concurrency

    def run_variant(
        self,
        flags: Dict[str, bool],
        samples: Sequence[Sample],
        eval_samples: Sequence[Sample],
        vocabularies: Vocabularies,
        config: TrainConfig,
        output_dir: Path,
        kind: InstructionKind,
    ) -> Dict[str, Any]:
        base = {"drop_events": False, "drop_context": False, "drop_stage1_cot": False}
        variant = TrainConfig(**{**config.model_dump(), **base, **flags})
        result = self.training_worker.execute(samples, vocabularies, variant, output_dir)
        engine = SegWorldEngine(result.model, variant.engine_config(), cache=NoCache())
        outcome = EvaluationWorker(engine, self.max_concurrency).evaluate(eval_samples, kind)
        report = outcome.report
        return {
            "miou": report.miou if report else 0.0,
            "ciou": report.ciou if report else 0.0,
            "seg_rate": report.seg_rate if report else 0.0,
            "count": report.count if report else 0,
        }

    def execute(
        self,
        samples: Sequence[Sample],
        eval_samples: Sequence[Sample],
        vocabularies: Vocabularies,
        config: TrainConfig,
        output_dir: Path,
        kind: InstructionKind = InstructionKind.INTENT,
    ) -> List[Dict[str, Any]]:
        output_dir = Path(output_dir)
        rows = []
        for directory, label, flags in ABLATION_VARIANTS:
            logger.info(f"Ablation variant: {label}")
            metrics = self.run_variant(
                flags, samples, eval_samples, vocabularies, config, output_dir / directory, kind
            )
            rows.append({"variant": label, **metrics})
        write_ablation(rows, output_dir)
        return rows


def write_ablation(rows: List[Dict[str, Any]], output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "ablation.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    with open(output_dir / "ablation.csv", "w", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=["variant", "miou", "ciou", "seg_rate", "count"], lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(rows)
