"""Training loop for the two-pass model.

Both passes run in one differentiable graph. A self-generated context is
decoded under ``torch.no_grad`` and re-enters Stage 1 as plain token ids, so
the mask and Stage-1 language-modeling losses never reach the parameters that
only Stage 0 uses; those learn from the Stage-0 loss alone.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from ..backbones import BackboneType, create_backbone
from ..caching.no_cache import NoCache
from ..checkpoint import save_checkpoint
from ..engine import SegWorldEngine
from ..exceptions import NonFiniteLoss
from ..metrics import make_record, summarize
from ..model import SegWorldModel
from ..models import (
    InstructionKind,
    MetricsReport,
    Sample,
    SceneContext,
    ScheduleState,
    TrainConfig,
    Vocabularies,
)
from ..sequences import chain_tokens, stage0_target, stage1_prompt
from ..tokenizer import PAD, Tokenizer
from .losses import LossBreakdown, lm_loss, total_loss
from .schedule import (
    ContextChoice,
    choose_context,
    sample_instruction,
    self_context_probability,
)

logger = logging.getLogger(__name__)

SIMILARITY_SAMPLES = 16


@dataclass
class PreparedBatch:
    samples: List[Sample]
    stage0_ids: List[List[int]]
    stage1_prompts: List[List[int]]
    stage1_responses: List[List[int]]
    choices: List[ContextChoice]
    intent_count: int

    @property
    def self_fraction(self) -> float:
        return sum(c.gradient_blocked for c in self.choices) / len(self.choices)

    @property
    def intent_fraction(self) -> float:
        return self.intent_count / len(self.samples)


@dataclass
class TrainingResult:
    model: SegWorldModel
    history: List[Dict[str, float]] = field(default_factory=list)
    evaluations: List[Dict[str, float]] = field(default_factory=list)
    checkpoint: Optional[Path] = None


def build_model(tokenizer: Tokenizer, config: TrainConfig) -> SegWorldModel:
    """Seeded toy-backbone model."""
    torch.manual_seed(config.seed)
    backbone = create_backbone(
        BackboneType.TOY,
        tokenizer,
        hidden_dim=config.hidden_dim,
        num_layers=config.num_layers,
        num_heads=config.num_heads,
    )
    return SegWorldModel(backbone, prompt_dim=config.prompt_dim)


def _padded(sequences: Sequence[List[int]], pad: int) -> Tuple[torch.Tensor, torch.Tensor]:
    width = max(len(seq) for seq in sequences)
    ids = torch.full((len(sequences), width), pad, dtype=torch.long)
    present = torch.zeros((len(sequences), width), dtype=torch.bool)
    for row, seq in enumerate(sequences):
        ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        present[row, : len(seq)] = True
    return ids, present


class Trainer:
    """Single writer over the model's weights."""

    def __init__(
        self,
        model: SegWorldModel,
        samples: Sequence[Sample],
        config: TrainConfig,
        output_dir: Optional[Path] = None,
    ):
        if not samples:
            raise ValueError("training needs at least one sample")
        self.model = model
        self.tokenizer = model.backbone.tokenizer
        self.samples = list(samples)
        self.config = config
        self.output_dir = Path(output_dir) if output_dir else None
        self.state = ScheduleState()
        self.rng = np.random.default_rng(config.seed)
        self._order_rng = np.random.default_rng(config.seed + 1)
        self._queue: List[int] = []
        self._pad = self.tokenizer.special(PAD)

        if config.freeze_backbone:
            for parameter in model.backbone.parameters():
                parameter.requires_grad_(False)
        trainable = [p for p in model.parameters() if p.requires_grad]
        self.optimizer = torch.optim.AdamW(
            trainable, lr=config.learning_rate, weight_decay=config.weight_decay
        )
        self.engine = SegWorldEngine(model, config.engine_config(), cache=NoCache())
        logger.info(
            f"Trainer ready: {len(self.samples)} samples, "
            f"{sum(p.numel() for p in trainable)} trainable parameters"
        )

    # batches

    def next_batch(self) -> List[Sample]:
        size = min(self.config.batch_size, len(self.samples))
        while len(self._queue) < size:
            self._queue.extend(self._order_rng.permutation(len(self.samples)).tolist())
        indices, self._queue = self._queue[:size], self._queue[size:]
        return [self.samples[i] for i in indices]

    def prepare_batch(self, samples: Sequence[Sample]) -> PreparedBatch:
        config = self.config
        include_events = not config.drop_events
        t = self.state.step
        instructions, choices = [], []
        for sample in samples:
            instructions.append(sample_instruction(sample, config.intent_mix, self.rng))
            choices.append(
                choose_context(
                    t, config.schedule, self.rng, sample.observation, SceneContext.empty()
                )
            )
        chosen = [i for i, c in enumerate(choices) if c.gradient_blocked]
        if chosen:
            was_training = self.model.training
            self.model.eval()
            decoded = self.engine.observe_batch([samples[i].image for i in chosen])
            self.model.train(was_training)
            for i, context in zip(chosen, decoded):
                choices[i] = replace(choices[i], context=context)

        encode = self.tokenizer.encode
        stage0_ids, prompts, responses = [], [], []
        for sample, instruction, choice in zip(samples, instructions, choices):
            stage0_ids.append(encode(stage0_target(sample.observation, include_events)))
            context = None if config.drop_context else choice.context
            if context is not None and not include_events:
                context = context.without_events()
            prompts.append(encode(stage1_prompt(context, instruction, include_events)))
            responses.append(encode(chain_tokens(sample.chain, config.drop_stage1_cot)))
        return PreparedBatch(
            samples=list(samples),
            stage0_ids=stage0_ids,
            stage1_prompts=prompts,
            stage1_responses=responses,
            choices=choices,
            intent_count=sum(i.kind == InstructionKind.INTENT for i in instructions),
        )

    # losses

    def forward_losses(self, batch: PreparedBatch) -> LossBreakdown:
        """Joint-loss breakdown for a prepared batch, with the graph attached."""
        backbone = self.model.backbone
        images = [s.image for s in batch.samples]

        ids0, present0 = _padded(batch.stage0_ids, self._pad)
        out0 = backbone(images, ids0, 0)
        length0 = ids0.shape[1]
        logits0 = out0.logits[:, out0.text_offset - 1 : out0.text_offset - 1 + length0]
        lm0 = lm_loss(torch.log_softmax(logits0, dim=-1), ids0, present0)

        texts = [p + r for p, r in zip(batch.stage1_prompts, batch.stage1_responses)]
        ids1, present1 = _padded(texts, self._pad)
        response_mask = present1.clone()
        for row, prompt in enumerate(batch.stage1_prompts):
            response_mask[row, : len(prompt)] = False
        out1 = backbone(images, ids1, 1)
        length1 = ids1.shape[1]
        logits1 = out1.logits[:, out1.text_offset - 1 : out1.text_offset - 1 + length1]
        lm1 = lm_loss(torch.log_softmax(logits1, dim=-1), ids1, response_mask)

        seg_rows = torch.tensor([out1.text_offset + len(text) - 1 for text in texts])
        seg_hidden = out1.hidden[torch.arange(len(texts)), seg_rows]
        prompt = self.model.projection(seg_hidden)
        features = torch.stack(
            [backbone.encode_image(image).reshape(-1, backbone.feature_dim) for image in images]
        )
        mask_logits = self.model.decoder(prompt, features)
        dtype = mask_logits.dtype
        gt = torch.stack(
            [torch.from_numpy(s.mask_gt.bits.reshape(-1).astype(np.float64)) for s in batch.samples]
        ).to(dtype)
        return total_loss(mask_logits, gt, lm0, lm1, self.config.weights)

    # optimization

    def train_step(self, samples: Sequence[Sample]) -> Dict[str, float]:
        """One optimizer step; returns the logged row."""
        t = self.state.step
        self.model.train()
        batch = self.prepare_batch(samples)
        breakdown = self.forward_losses(batch)
        if not torch.isfinite(breakdown.total):
            raise NonFiniteLoss(
                f"non-finite loss at step {t}",
                diagnostics={
                    "step": t,
                    "components": breakdown.as_log(),
                    "samples": [s.id for s in batch.samples],
                },
            )
        self.optimizer.zero_grad(set_to_none=True)
        breakdown.total.backward()
        self.optimizer.step()
        self.state.advance()
        row = {"step": t, **breakdown.as_log()}
        row["p_self"] = self_context_probability(t, self.config.schedule)
        row["intent_fraction"] = batch.intent_fraction
        row["self_fraction"] = batch.self_fraction
        return row

    def evaluate(self, samples: Optional[Sequence[Sample]] = None) -> Optional[MetricsReport]:
        """Intent-level metrics through the inference engine."""
        samples = [
            s
            for s in (samples or self.samples)
            if s.instruction(InstructionKind.INTENT) is not None
        ]
        if not samples:
            return None
        was_training = self.model.training
        self.model.eval()
        records = []
        for sample in samples:
            result = self.engine.segment(
                sample.image, sample.instruction(InstructionKind.INTENT), sample.id
            )
            records.append(
                make_record(
                    sample.id,
                    sample.chain.action,
                    result.mask if result.emitted_seg else None,
                    sample.mask_gt,
                )
            )
        self.model.train(was_training)
        return summarize(records)

    def similarity(self, samples: Sequence[Sample]) -> np.ndarray:
        chosen = [s for s in samples if s.instruction(InstructionKind.INTENT) is not None]
        chosen = chosen[:SIMILARITY_SAMPLES]
        self.model.eval()
        return self.engine.similarity_matrix(
            [s.instruction(InstructionKind.INTENT) for s in chosen],
            [s.image for s in chosen],
            [s.mask_gt for s in chosen],
        )

    def train(self) -> TrainingResult:
        result = TrainingResult(model=self.model)
        log_file = eval_file = None
        if self.output_dir:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            log_file = open(self.output_dir / "train_log.jsonl", "w")
            eval_file = open(self.output_dir / "eval_log.jsonl", "w")
        try:
            for _ in range(self.config.steps):
                row = self.train_step(self.next_batch())
                result.history.append(row)
                if log_file:
                    log_file.write(json.dumps(row, sort_keys=True) + "\n")
                if row["step"] % self.config.log_every == 0:
                    logger.info(
                        f"step {row['step']}: total={row['total']:.4f} "
                        f"mask={row['loss_mask']:.4f} lm0={row['loss_lm0']:.4f} "
                        f"lm1={row['loss_lm1']:.4f} p_self={row['p_self']:.3f}"
                    )
                if self.config.eval_every and self.state.step % self.config.eval_every == 0:
                    report = self.evaluate()
                    if report is not None:
                        entry = {
                            "step": self.state.step,
                            "miou": report.miou,
                            "ciou": report.ciou,
                            "seg_rate": report.seg_rate,
                        }
                        result.evaluations.append(entry)
                        logger.info(f"eval at step {self.state.step}: miou={report.miou:.4f}")
                        if eval_file:
                            eval_file.write(json.dumps(entry, sort_keys=True) + "\n")
        finally:
            if log_file:
                log_file.close()
            if eval_file:
                eval_file.close()
        return result


def write_similarity(matrix: np.ndarray, path: Path) -> Path:
    np.savetxt(path, matrix, delimiter=",", fmt="%.6f")
    return path


def train(
    samples: Sequence[Sample],
    vocabularies: Vocabularies,
    config: TrainConfig,
    output_dir: Optional[Path] = None,
) -> TrainingResult:
    """Build, train and (with an output directory) checkpoint a toy-backbone model."""
    tokenizer = Tokenizer(vocabularies)
    model = build_model(tokenizer, config)
    trainer = Trainer(model, samples, config, output_dir)
    result = trainer.train()
    if output_dir:
        output_dir = Path(output_dir)
        if any(s.instruction(InstructionKind.INTENT) is not None for s in samples):
            write_similarity(trainer.similarity(samples), output_dir / "similarity.csv")
        else:
            logger.warning("No intent instructions in the training set, skipping similarity.csv")
        result.checkpoint = save_checkpoint(
            output_dir / "model.ckpt",
            model,
            vocabularies,
            train_config=config,
            engine_config=config.engine_config(),
        )
    return result
