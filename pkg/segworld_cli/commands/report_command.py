import logging
from pathlib import Path

from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, UsageError, run_config
from segworld_cli.manifest import build_manifest, write_manifest
from segworld_cli.workers.report_worker import ReportWorker

logger = logging.getLogger(__name__)


@CommandRegistry.register
class ReportCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "report"

    @property
    def description(self) -> str:
        return "Plot loss curves, the sampling schedule and the similarity matrix of a run."

    @classmethod
    def configure_parser(cls, subparser):
        subparser.add_argument("--run", required=True, help="Run directory of `segworld train`")
        subparser.add_argument("--out", help="Report directory (default: <run>/report)")

    def execute(self) -> bool:
        run_dir = Path(self.args["run"])
        if not run_dir.is_dir():
            raise UsageError(f"{run_dir} is not a directory; pass the output of `segworld train`")
        out = Path(self.args.get("out") or run_dir / "report")
        write_manifest(build_manifest(self.name, run_config(self.args)), out)
        self.emit(ReportWorker().execute(run_dir, out))
        return True
