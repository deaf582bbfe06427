import argparse
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

from ..formatters import get_formatter

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad invocation: missing inputs, unreadable files or invalid options."""


class BaseCommand(ABC):
    """
    Abstract base class for commands following the Command Pattern.
    Each command encapsulates one experiment step and reports success as a boolean.
    """

    args: Dict[str, Any] = {}

    @abstractmethod
    def execute(self) -> bool:
        """
        Execute the command's action.

        Returns:
            True on success, False when the command ran but its check failed
        """

    @property
    @abstractmethod
    def name(self) -> str:
        """Name of the command on the command line."""

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line help text."""

    @classmethod
    def configure_parser(cls, subparser: argparse.ArgumentParser) -> None:
        """
        Configure the argument parser for this command.

        Args:
            subparser: The subparser to configure
        """

    @classmethod
    def get_param_mapping(cls) -> Dict[str, str]:
        """
        Get a mapping from CLI argument names to constructor parameter names.

        Returns:
            A dictionary mapping CLI argument names to constructor parameter names
        """
        return {}

    @classmethod
    def create_from_args(cls, args_dict: Dict[str, Any]) -> "BaseCommand":
        """
        Create a command instance from parsed arguments.

        Args:
            args_dict: Dictionary of parsed command-line arguments

        Returns:
            An instance of the command
        """
        constructor_params = {}
        for arg_name, param_name in cls.get_param_mapping().items():
            if arg_name in args_dict:
                constructor_params[param_name] = args_dict[arg_name]
        return cls(**constructor_params)

    def emit(self, data: Any) -> None:
        """Print a summary in the format chosen with --format."""
        print(get_formatter(self.args.get("output_format")).format(data))


def run_config(args: Dict[str, Any]) -> Dict[str, Any]:
    """CLI arguments worth recording in a manifest."""
    skipped = {"command", "output_format"}
    return {key: value for key, value in sorted(args.items()) if key not in skipped}
