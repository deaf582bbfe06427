import logging
from pathlib import Path
from typing import Dict, List

from segworld.core.benchkit.ingest import ingest_dataset
from segworld.core.benchkit.splits import build_splits
from segworld.core.checkpoint import load_checkpoint
from segworld.core.engine import SegWorldEngine
from segworld.core.models import EngineConfig, InstructionKind, Sample
from segworld.core.settings import settings
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, UsageError, run_config
from segworld_cli.manifest import build_manifest, write_manifest
from segworld_cli.workers.evaluation_worker import (
    SPLIT_NAMES,
    EvaluationWorker,
    build_oracle_model,
    select_split,
)

logger = logging.getLogger(__name__)

ALL = "all"


@CommandRegistry.register
class EvalCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "eval"

    @property
    def description(self) -> str:
        return "Evaluate a checkpoint per test split and instruction kind."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--checkpoint", help="Checkpoint written by `segworld train`")
        subparser.add_argument("--dataset", required=True, help="JSON-lines dataset")
        subparser.add_argument(
            "--split", choices=[*SPLIT_NAMES, ALL], default=ALL, help="Test split"
        )
        subparser.add_argument(
            "--kind",
            choices=[k.value for k in InstructionKind] + [ALL],
            default=ALL,
            help="Instruction kind",
        )
        subparser.add_argument(
            "--oracle",
            action="store_true",
            help="Use the stub backbone built from the dataset's own chains",
        )
        subparser.add_argument(
            "--samples", type=int, default=1, help="Stage-0 context samples per image (K)"
        )
        subparser.add_argument("--seed", type=int, default=0, help="Sampling seed")
        subparser.add_argument("--out", default="runs/eval", help="Directory for report files")

    def _engine(self, ingested) -> SegWorldEngine:
        overrides = {
            "context_samples": self.args.get("samples", 1),
            "seed": self.args.get("seed", 0),
        }
        if self.args.get("oracle"):
            model = build_oracle_model(ingested.samples, ingested.vocabularies)
            return SegWorldEngine(model, EngineConfig(**overrides))
        if not self.args.get("checkpoint"):
            raise UsageError("pass --checkpoint or --oracle")
        loaded = load_checkpoint(self.args["checkpoint"])
        if loaded.tokenizer.vocabularies != ingested.vocabularies:
            raise UsageError("checkpoint and dataset use different vocabularies")
        config = loaded.engine_config.model_copy(update=overrides)
        return SegWorldEngine(loaded.model, config)

    def execute(self) -> bool:
        if self.args.get("samples", 1) < 1:
            raise UsageError("--samples must be at least 1")
        dataset = Path(settings.resolve_data_path(self.args["dataset"]))
        out = Path(self.args.get("out") or "runs/eval")
        manifest = build_manifest(
            self.name, run_config(self.args), self.args.get("seed"), dataset
        )
        write_manifest(manifest, out)

        ingested = ingest_dataset(dataset)
        split = build_splits(ingested.samples)
        names = list(SPLIT_NAMES) if self.args.get("split", ALL) == ALL else [self.args["split"]]
        samples_by_split: Dict[str, List[Sample]] = {
            name: select_split(ingested.samples, split, name) for name in names
        }
        kind = self.args.get("kind", ALL)
        kinds = list(InstructionKind) if kind == ALL else [InstructionKind(kind)]

        worker = EvaluationWorker(self._engine(ingested))
        outcomes = worker.execute(samples_by_split, kinds, out, manifest.hash)
        self.emit([outcome.summary_row() for outcome in outcomes])
        return True
