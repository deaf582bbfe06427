import json
import zipfile

import pytest
import torch

from segworld.core.backbones import StubBackbone, ToyBackbone
from segworld.core.checkpoint import (
    CONFIG_ENTRY,
    WEIGHTS_ENTRY,
    load_checkpoint,
    model_spec,
    save_checkpoint,
)
from segworld.core.exceptions import CheckpointError, UnreadableFile
from segworld.core.model import SegWorldModel
from segworld.core.models import EngineConfig, TrainConfig


@pytest.fixture
def model(tokenizer):
    torch.manual_seed(0)
    return SegWorldModel(ToyBackbone(tokenizer, hidden_dim=16, num_heads=2), prompt_dim=8)


def rewrite_config(path, **changes):
    with zipfile.ZipFile(path) as archive:
        config = json.loads(archive.read(CONFIG_ENTRY))
        weights = archive.read(WEIGHTS_ENTRY)
    config.update(changes)
    for key, value in changes.items():
        if value is None:
            config.pop(key)
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr(CONFIG_ENTRY, json.dumps(config))
        archive.writestr(WEIGHTS_ENTRY, weights)


class TestCheckpoint:
    """Test suite for checkpoint archives."""

    def test_round_trip(self, tmp_path, model, vocabularies):
        """Test that weights, vocabularies and configs survive a save/load cycle."""
        # Arrange
        train_config = TrainConfig(warmup_steps=50, hidden_dim=16, num_heads=2, prompt_dim=8)
        engine_config = EngineConfig(drop_events=True)

        # Act
        path = save_checkpoint(
            tmp_path / "model.ckpt", model, vocabularies, train_config, engine_config
        )
        loaded = load_checkpoint(path)

        # Assert
        assert loaded.tokenizer.vocab_size == model.backbone.tokenizer.vocab_size
        assert loaded.train_config == train_config
        assert loaded.engine_config == engine_config
        original = model.state_dict()
        for key, tensor in loaded.model.state_dict().items():
            assert torch.equal(tensor, original[key]), key
        assert not loaded.model.training

    def test_archives_are_byte_identical(self, tmp_path, model, vocabularies):
        a = save_checkpoint(tmp_path / "a.ckpt", model, vocabularies)
        b = save_checkpoint(tmp_path / "b.ckpt", model, vocabularies)

        assert a.read_bytes() == b.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableFile):
            load_checkpoint(tmp_path / "nope.ckpt")

    def test_not_a_zip(self, tmp_path):
        path = tmp_path / "model.ckpt"
        path.write_text("weights")

        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_entry(self, tmp_path):
        path = tmp_path / "model.ckpt"
        with zipfile.ZipFile(path, "w") as archive:
            archive.writestr(CONFIG_ENTRY, "{}")

        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    @pytest.mark.parametrize("version", [None, 2])
    def test_version_checked(self, tmp_path, model, vocabularies, version):
        path = save_checkpoint(tmp_path / "model.ckpt", model, vocabularies)
        rewrite_config(path, version=version)

        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_only_toy_backbones(self, tokenizer):
        with pytest.raises(CheckpointError):
            model_spec(SegWorldModel(StubBackbone(tokenizer)))
