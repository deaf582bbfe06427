import logging
from pathlib import Path

from segworld.core.benchkit.ingest import VALIDATOR_REJECTED, ingest_dataset, write_diagnostics
from segworld.core.benchkit.validator import default_rules
from segworld.core.settings import settings
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, run_config
from segworld_cli.manifest import build_manifest, write_manifest

logger = logging.getLogger(__name__)

DIAGNOSTICS_FILE = "diagnostics.jsonl"


@CommandRegistry.register
class ValidateCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "validate"

    @property
    def description(self) -> str:
        return "Check every intent-level instruction of a dataset against the validator rules."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--dataset", required=True, help="JSON-lines dataset")
        subparser.add_argument("--lexicon", help="Near-synonym lexicon (JSON term -> [synonyms])")
        subparser.add_argument("--patterns", help="First-person pattern list, one per line")
        subparser.add_argument("--out", default=".", help="Directory for diagnostics.jsonl")

    def execute(self) -> bool:
        """Exit status reflects whether any intent instruction failed."""
        dataset = Path(settings.resolve_data_path(self.args["dataset"]))
        rules = default_rules(self.args.get("lexicon"), self.args.get("patterns"))
        out = Path(self.args.get("out") or ".")
        write_manifest(build_manifest(self.name, run_config(self.args), dataset=dataset), out)

        result = ingest_dataset(dataset, rules=rules)
        write_diagnostics(result.diagnostics, out / DIAGNOSTICS_FILE)
        failures = [d for d in result.diagnostics if d.code == VALIDATOR_REJECTED]
        for failure in failures:
            logger.error(f"line {failure.line} ({failure.sample_id}): {failure.message}")

        self.emit(
            {
                "dataset": str(dataset),
                "records": result.lines,
                "accepted": len(result.samples),
                "rejected": result.rejected,
                "intent_failures": len({d.line for d in failures}),
                "diagnostics": str(out / DIAGNOSTICS_FILE),
            }
        )
        return not failures
