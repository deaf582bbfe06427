"""
Tests for the command registry.
"""

from typing import Dict

import pytest

from segworld_cli.cmd import discover_commands
from segworld_cli.commands import CommandRegistry
from segworld_cli.commands.base_command import BaseCommand, run_config


@pytest.mark.skipif(True, reason="This is a helper class, not a test class")
class TestCommand(BaseCommand):
    """
    Test command implementation.
    """

    def __init__(self, dataset: str = None, seed: int = None):
        self.dataset = dataset
        self.seed = seed

    @property
    def name(self) -> str:
        return "test-command"

    @property
    def description(self) -> str:
        return "Test command for unit tests"

    @classmethod
    def get_param_mapping(cls) -> Dict[str, str]:
        return {"dataset": "dataset", "seed": "seed"}

    def execute(self) -> bool:
        return True


@pytest.fixture
def setup_test_commands():
    """
    Register the test command on a saved copy of the registry.
    """
    saved = dict(CommandRegistry._commands)
    CommandRegistry._commands.clear()

    CommandRegistry.register(TestCommand)

    yield

    CommandRegistry._commands.clear()
    CommandRegistry._commands.update(saved)


def test_command_registration(setup_test_commands):
    """
    Test that commands are properly registered in the registry.
    """
    assert CommandRegistry.get_available_commands() == ["test-command"]
    assert CommandRegistry.get_command("test-command") == TestCommand


def test_unknown_command(setup_test_commands):
    with pytest.raises(ValueError):
        CommandRegistry.get_command("missing")


def test_command_creation(setup_test_commands):
    """
    Test that commands can be created from the registry.
    """
    command = CommandRegistry.create_command("test-command", dataset="toy.jsonl", seed=3)

    assert isinstance(command, TestCommand)
    assert command.dataset == "toy.jsonl"
    assert command.seed == 3


def test_create_from_args_uses_param_mapping(setup_test_commands):
    command = TestCommand.create_from_args({"dataset": "toy.jsonl", "out": "runs"})

    assert command.dataset == "toy.jsonl"
    assert command.seed is None


def test_nameless_command_rejected(setup_test_commands):
    class Nameless(BaseCommand):
        name = None
        description = "no name"

        def execute(self) -> bool:
            return True

    with pytest.raises(ValueError):
        CommandRegistry.register(Nameless)


def test_discovered_commands():
    """
    Test that every experiment command registers itself on import.
    """
    discover_commands()

    assert CommandRegistry.get_available_commands() == [
        "ablate",
        "eval",
        "report",
        "split",
        "toy-dataset",
        "train",
        "validate",
    ]


def test_run_config_drops_presentation_keys():
    args = {"command": "eval", "output_format": "json", "seed": 0, "dataset": "toy.jsonl"}

    assert run_config(args) == {"dataset": "toy.jsonl", "seed": 0}
    assert list(run_config(args)) == ["dataset", "seed"]
