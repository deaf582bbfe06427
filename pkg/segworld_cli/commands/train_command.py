import logging
from pathlib import Path

from segworld.core.benchkit.ingest import ingest_dataset
from segworld.core.settings import settings
from segworld.core.training.config import load_train_config
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, UsageError
from segworld_cli.manifest import build_manifest, write_manifest
from segworld_cli.workers.training_worker import TrainingWorker

logger = logging.getLogger(__name__)

DEFAULT_RUN_DIR = "runs/train"


@CommandRegistry.register
class TrainCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "train"

    @property
    def description(self) -> str:
        return "Train a toy-backbone SegWorld model from a flat YAML config."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--config", required=True, help="Flat YAML training config")
        subparser.add_argument("--dataset", help="JSON-lines dataset (overrides the config)")
        subparser.add_argument("--seed", type=int, help="Seed (overrides the config)")
        subparser.add_argument("--out", help="Run directory (overrides the config)")

    def execute(self) -> bool:
        config = load_train_config(
            self.args["config"],
            {
                "dataset": self.args.get("dataset"),
                "seed": self.args.get("seed"),
                "output_dir": self.args.get("out"),
            },
        )
        if not config.dataset:
            raise UsageError("no dataset given; pass --dataset or set `dataset` in the config")
        dataset = Path(settings.resolve_data_path(config.dataset))
        out = Path(config.output_dir or DEFAULT_RUN_DIR)
        write_manifest(
            build_manifest(self.name, config.model_dump(mode="json"), config.seed, dataset), out
        )

        ingested = ingest_dataset(dataset)
        result = TrainingWorker().execute(ingested.samples, ingested.vocabularies, config, out)
        summary = {"run_dir": str(out), "steps": len(result.history)}
        if result.history:
            last = result.history[-1]
            for key in ("total", "loss_mask", "loss_lm0", "loss_lm1"):
                summary[key] = last[key]
        summary["checkpoint"] = str(result.checkpoint) if result.checkpoint else None
        self.emit(summary)
        return True
