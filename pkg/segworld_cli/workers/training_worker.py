import logging
from pathlib import Path
from typing import Sequence

from segworld.core.models import Sample, TrainConfig, Vocabularies
from segworld.core.training.config import dump_train_config
from segworld.core.training.trainer import TrainingResult, train

from .worker_base import Worker

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.yaml"


class TrainingWorker(Worker):
    """Trains a toy-backbone model on the train split and writes the run directory."""

    def execute(
        self,
        samples: Sequence[Sample],
        vocabularies: Vocabularies,
        config: TrainConfig,
        output_dir: Path,
    ) -> TrainingResult:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        dump_train_config(config, output_dir / CONFIG_FILE)
        train_samples = [s for s in samples if s.split == "train"]
        logger.info(f"Training on {len(train_samples)} samples for {config.steps} steps")
        return train(train_samples, vocabularies, config, output_dir)
