#!/usr/bin/env python3
import argparse
import importlib
import logging
import pkgutil
import sys
from typing import Any, Dict, List, Optional

import torch

from segworld.core.exceptions import ConfigError, SegWorldError, UnreadableFile
from segworld.core.settings import settings
from segworld_cli.commands import CommandRegistry, UsageError
from segworld_cli.formatters import DEFAULT_FORMATTER, get_available_formats

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def discover_commands():
    """
    Discover and import all command modules to ensure they are registered.
    This automatically finds and imports any modules in the commands package.
    """
    commands_package = "segworld_cli.commands"
    package = importlib.import_module(commands_package)

    prefix = package.__name__ + "."
    for _, module_name, _ in pkgutil.iter_modules(package.__path__, prefix):
        if not module_name.endswith("base_command"):
            importlib.import_module(module_name)
            logger.debug(f"Imported command module: {module_name}")

    logger.debug(f"Discovered commands: {CommandRegistry.get_available_commands()}")


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subparser per registered command."""
    discover_commands()

    parser = argparse.ArgumentParser(
        prog="segworld",
        description="SegWorld intent-level segmentation experiments",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument(
        "--format",
        dest="output_format",
        choices=get_available_formats(),
        default=DEFAULT_FORMATTER,
        help="Format of the printed summary",
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")
    for command_name in CommandRegistry.get_available_commands():
        command_class = CommandRegistry.get_command(command_name)
        temp_instance = command_class.__new__(command_class)
        cmd_parser = subparsers.add_parser(
            command_name,
            help=temp_instance.description,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        command_class.configure_parser(cmd_parser)
    return parser


def parse_args(args: List[str]) -> argparse.Namespace:
    return build_parser().parse_args(args)


def execute_command(command_name: str, args_dict: Dict[str, Any]) -> bool:
    """
    Instantiate and run a registered command.

    Returns:
        True if the command executed successfully, False otherwise
    """
    command_class = CommandRegistry.get_command(command_name)
    command = command_class.create_from_args(args_dict)
    command.args = args_dict
    return command.execute()


def main(args: Optional[List[str]] = None) -> int:
    """Entry point; exit codes are 0 on success, 1 on a failed check, 2 on usage errors."""
    if args is None:
        args = sys.argv[1:]
    if not args:
        args = ["--help"]

    logging.basicConfig(
        level=settings.log_level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    try:
        parsed_args = parse_args(args)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 for usage problems
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if parsed_args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Debug logging is enabled")
    if settings.torch_num_threads > 0:
        torch.set_num_threads(settings.torch_num_threads)

    if not parsed_args.command:
        logger.error("No command specified")
        logger.info(f"Available commands: {', '.join(CommandRegistry.get_available_commands())}")
        return EXIT_USAGE

    cmd_args = vars(parsed_args)
    cmd_args.pop("debug", False)
    try:
        success = execute_command(parsed_args.command, cmd_args)
        return EXIT_OK if success else EXIT_FAILED
    except (UsageError, UnreadableFile, ConfigError) as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except SegWorldError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILED
    except Exception as e:
        logger.error(f"Error executing command: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
