import json
import logging
from pathlib import Path

from segworld.core.benchkit.ingest import ingest_dataset
from segworld.core.benchkit.splits import build_splits, leakage_summary, split_counts
from segworld.core.settings import settings
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, run_config
from segworld_cli.manifest import build_manifest, write_manifest

logger = logging.getLogger(__name__)

SPLITS_FILE = "splits.json"


@CommandRegistry.register
class SplitCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "split"

    @property
    def description(self) -> str:
        return "Build the official and leakage-aware (clean / overlap) test splits."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--dataset", required=True, help="JSON-lines dataset")
        subparser.add_argument("--out", default=".", help="Directory for splits.json")

    def execute(self) -> bool:
        dataset = Path(settings.resolve_data_path(self.args["dataset"]))
        out = Path(self.args.get("out") or ".")
        manifest = build_manifest(self.name, run_config(self.args), dataset=dataset)
        write_manifest(manifest, out)

        result = ingest_dataset(dataset)
        split = build_splits(result.samples)
        counts = split_counts(split)
        payload = {
            "manifest_hash": manifest.hash,
            "counts": counts,
            "leakage": leakage_summary(result.samples),
            "splits": split.model_dump(mode="json"),
        }
        (out / SPLITS_FILE).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.emit(counts)
        return True
