import logging
from pathlib import Path

from segworld.core.benchkit.ingest import ingest_dataset
from segworld.core.benchkit.splits import build_splits
from segworld.core.models import InstructionKind
from segworld.core.settings import settings
from segworld.core.training.config import load_train_config
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, UsageError
from segworld_cli.manifest import build_manifest, write_manifest
from segworld_cli.workers.ablation_worker import AblationWorker
from segworld_cli.workers.evaluation_worker import SPLIT_NAMES, select_split

logger = logging.getLogger(__name__)


@CommandRegistry.register
class AblateCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "ablate"

    @property
    def description(self) -> str:
        return "Train and evaluate the full model and its three ablations side by side."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--config", required=True, help="Base flat YAML training config")
        subparser.add_argument("--dataset", help="JSON-lines dataset (overrides the config)")
        subparser.add_argument("--seed", type=int, help="Seed (overrides the config)")
        subparser.add_argument("--out", default="runs/ablate", help="Directory for the variants")
        subparser.add_argument(
            "--split", choices=list(SPLIT_NAMES), default="clean", help="Evaluation split"
        )
        subparser.add_argument(
            "--kind",
            choices=[k.value for k in InstructionKind],
            default=InstructionKind.INTENT.value,
            help="Instruction kind to evaluate",
        )

    def execute(self) -> bool:
        config = load_train_config(
            self.args["config"],
            {"dataset": self.args.get("dataset"), "seed": self.args.get("seed")},
        )
        if not config.dataset:
            raise UsageError("no dataset given; pass --dataset or set `dataset` in the config")
        dataset = Path(settings.resolve_data_path(config.dataset))
        out = Path(self.args.get("out") or "runs/ablate")
        config_snapshot = {
            **config.model_dump(mode="json"),
            "split": self.args.get("split", "clean"),
            "kind": self.args.get("kind", InstructionKind.INTENT.value),
        }
        write_manifest(build_manifest(self.name, config_snapshot, config.seed, dataset), out)

        ingested = ingest_dataset(dataset)
        eval_samples = select_split(
            ingested.samples, build_splits(ingested.samples), self.args.get("split", "clean")
        )
        if not eval_samples:
            logger.warning("Evaluation split is empty; evaluating on the training samples")
            eval_samples = [s for s in ingested.samples if s.split == "train"]
        rows = AblationWorker().execute(
            ingested.samples,
            eval_samples,
            ingested.vocabularies,
            config,
            out,
            InstructionKind(self.args.get("kind", InstructionKind.INTENT.value)),
        )
        self.emit(rows)
        return True
