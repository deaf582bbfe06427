import logging
from pathlib import Path

from segworld.core.benchkit.splits import build_splits, split_counts
from segworld.core.benchkit.toy import ToyVariant, generate_toy_dataset, write_toy_dataset
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, UsageError, run_config
from segworld_cli.manifest import build_manifest, write_manifest

logger = logging.getLogger(__name__)


@CommandRegistry.register
class ToyDatasetCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "toy-dataset"

    @property
    def description(self) -> str:
        return "Write a synthetic Intent2Part-style dataset and its vocabulary sidecar."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--out", required=True, help="Path of the JSON-lines dataset")
        subparser.add_argument("--train", type=int, default=32, help="Number of train samples")
        subparser.add_argument("--test", type=int, default=16, help="Number of test samples")
        subparser.add_argument(
            "--overlap",
            type=float,
            default=0.25,
            help="Fraction of test samples reusing a training base image",
        )
        subparser.add_argument("--seed", type=int, default=0, help="Generator seed")
        subparser.add_argument(
            "--variant",
            choices=[v.value for v in ToyVariant],
            default=ToyVariant.STANDARD.value,
            help="Scene construction",
        )

    def execute(self) -> bool:
        """Generate and write the toy dataset."""
        out = Path(self.args["out"])
        if self.args.get("train", 0) < 0 or self.args.get("test", 0) < 0:
            raise UsageError("--train and --test must be non-negative")
        write_manifest(
            build_manifest(self.name, run_config(self.args), self.args.get("seed")), out.parent
        )
        samples = generate_toy_dataset(
            train=self.args["train"],
            test=self.args["test"],
            overlap_fraction=self.args["overlap"],
            seed=self.args["seed"],
            variant=self.args["variant"],
        )
        write_toy_dataset(out, samples)
        self.emit({"dataset": str(out), **split_counts(build_splits(samples))})
        return True
