"""Two-pass SegWorld inference.

Stage 0 observes the image without the instruction, Stage 1 reasons from the
instruction and that context to a chain ending in [SEG], whose hidden state is
projected into the mask-decoder prompt.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch

from .caching.base_cache import BaseCache
from .caching.factory import CacheFactory
from .exceptions import DecodeOverflow, DimensionMismatch, EmptyInput, NoSegToken
from .features import pooled_region_feature
from .metrics import binarize
from .model import SegWorldModel
from .models import (
    BinaryMask,
    DecodingMode,
    EngineConfig,
    GridImage,
    Instruction,
    ReasoningChain,
    SceneContext,
)
from .sequences import (
    Stage0Grammar,
    Stage1Grammar,
    parse_chain,
    parse_context,
    stage1_prompt,
)
from .settings import settings
from .tokenizer import PAD, SEG

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 64


@dataclass(frozen=True)
class SegState:
    """Hidden state captured at the emitted [SEG] token."""

    hidden: torch.Tensor

    def __post_init__(self):
        if not bool(torch.isfinite(self.hidden).all()):
            raise ValueError("SegState has non-finite entries")


@dataclass(frozen=True)
class PromptEmbedding:
    """Mask-decoder prompt; only project_seg creates one."""

    vector: torch.Tensor


@dataclass(frozen=True)
class SegmentationResult:
    """Outcome of one segment call; unpacks as (mask, chain, context)."""

    mask: BinaryMask
    chain: ReasoningChain
    context: SceneContext
    emitted_seg: bool
    probabilities: np.ndarray
    stage0_tokens: Tuple[str, ...] = ()
    stage1_tokens: Tuple[str, ...] = ()
    failure: Optional[str] = field(default=None)

    def __iter__(self) -> Iterator:
        return iter((self.mask, self.chain, self.context))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    denominator = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denominator == 0.0:
        return 0.0
    return float(np.dot(a, b) / denominator)


class SegWorldEngine:
    """Inference over a SegWorldModel; read-only with respect to its weights."""

    def __init__(
        self,
        model: SegWorldModel,
        config: Optional[EngineConfig] = None,
        cache: Optional[BaseCache] = None,
    ):
        self.model = model
        self.backbone = model.backbone
        self.tokenizer = model.backbone.tokenizer
        self.config = config or EngineConfig()
        self.cache = cache if cache is not None else CacheFactory.create_cache(settings)
        self._pad = self.tokenizer.special(PAD)
        self._seg = self.tokenizer.special(SEG)

    # decoding

    def _stage0_grammar(self) -> Stage0Grammar:
        return Stage0Grammar(
            self.tokenizer,
            include_events=not self.config.drop_events,
            constrained=self.config.constrained,
        )

    def _stage1_grammar(self) -> Stage1Grammar:
        return Stage1Grammar(self.tokenizer, constrained=self.config.constrained)

    def _batch(self, sequences: Sequence[List[int]]) -> torch.Tensor:
        width = max(len(seq) for seq in sequences)
        padded = [seq + [self._pad] * (width - len(seq)) for seq in sequences]
        return torch.tensor(padded, dtype=torch.long)

    def _pick(
        self,
        logits: torch.Tensor,
        allowed: Optional[List[int]],
        greedy: bool,
        generator: Optional[torch.Generator],
    ) -> int:
        scores = logits.detach().to(torch.float64)
        if allowed is not None:
            masked = torch.full_like(scores, float("-inf"))
            masked[allowed] = scores[allowed]
            scores = masked
        if greedy:
            return int(torch.argmax(scores))
        probs = torch.softmax(scores / self.config.temperature, dim=-1)
        return int(torch.multinomial(probs, 1, generator=generator))

    def generate(
        self,
        images: Sequence[GridImage],
        prompts: Sequence[List[int]],
        stage: int,
        grammar,
        greedy: bool = True,
        generator: Optional[torch.Generator] = None,
        max_steps: int = 64,
    ) -> List[List[int]]:
        """Decode responses for a batch in lockstep; each response ends when its grammar says so."""
        responses: List[List[int]] = [[] for _ in images]
        done = [False] * len(images)
        with torch.no_grad():
            for _ in range(max_steps):
                active = [i for i, finished in enumerate(done) if not finished]
                if not active:
                    break
                out = self.backbone(
                    [images[i] for i in active],
                    self._batch([list(prompts[i]) + responses[i] for i in active]),
                    stage,
                )
                for row, i in enumerate(active):
                    length = len(prompts[i]) + len(responses[i])
                    logits = out.logits[row, out.text_offset - 1 + length]
                    token = self._pick(logits, grammar.allowed(responses[i]), greedy, generator)
                    responses[i].append(token)
                    if grammar.is_complete(responses[i]):
                        done[i] = True
                    else:
                        grammar.check(responses[i])
        if not all(done):
            raise DecodeOverflow(f"decoding did not finish within {max_steps} tokens")
        return responses

    # stage 0

    def _observe_ids(
        self, images: Sequence[GridImage], greedy: bool, generator: Optional[torch.Generator]
    ) -> List[List[int]]:
        grammar = self._stage0_grammar()
        results: List[List[int]] = [[] for _ in images]
        groups: Dict[Tuple[int, int], List[int]] = {}
        for i, image in enumerate(images):
            groups.setdefault((image.height, image.width), []).append(i)
        for indices in groups.values():
            responses = self.generate(
                [images[i] for i in indices],
                [[] for _ in indices],
                stage=0,
                grammar=grammar,
                greedy=greedy,
                generator=generator,
                max_steps=grammar.budgets.max_response + 1,
            )
            for i, response in zip(indices, responses):
                results[i] = response
        return results

    def _to_context(self, ids: List[int]) -> SceneContext:
        context = parse_context(self.tokenizer.decode(ids))
        return context.without_events() if self.config.drop_events else context

    def observe_batch(
        self,
        images: Sequence[GridImage],
        greedy: bool = True,
        generator: Optional[torch.Generator] = None,
    ) -> List[SceneContext]:
        """Stage-0 contexts for many images, decoded together."""
        return [self._to_context(ids) for ids in self._observe_ids(images, greedy, generator)]

    def _observe_traced(self, image: GridImage) -> Tuple[SceneContext, Tuple[str, ...]]:
        greedy = self.config.decoding == DecodingMode.GREEDY
        key = (
            f"{image.digest()}:{self.model.weights_digest()}:"
            f"{self.config.cache_flags()}:{int(self.config.constrained)}"
        )
        if greedy:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        generator = None
        if not greedy:
            generator = torch.Generator().manual_seed(self.config.seed)
        ids = self._observe_ids([image], greedy, generator)[0]
        traced = (self._to_context(ids), tuple(self.tokenizer.decode(ids)))
        if greedy:
            self.cache.set(key, traced)
        return traced

    def observe(self, image: GridImage) -> SceneContext:
        """Instruction-free scene context of an image."""
        return self._observe_traced(image)[0]

    # stage 1

    def _resolve_traced(
        self, image: GridImage, instruction: Instruction, context: Optional[SceneContext]
    ) -> Tuple[ReasoningChain, SegState, Tuple[str, ...]]:
        if self.config.drop_context:
            context = None
        elif context is None or context.is_empty:
            logger.debug("Resolving with an empty scene context")
        prompt = self.tokenizer.encode(
            stage1_prompt(context, instruction, include_events=not self.config.drop_events)
        )
        if self.config.drop_stage1_cot:
            response = [self._seg]
        else:
            response = self.generate([image], [prompt], 1, self._stage1_grammar(), max_steps=17)[0]
        text = prompt + response
        if response[-1] != self._seg:
            raise NoSegToken("chain decoding ended without [SEG]")
        with torch.no_grad():
            out = self.backbone([image], self._batch([text]), 1)
        hidden = out.hidden[0, out.text_offset + len(text) - 1].detach().clone()
        chain = parse_chain(self.tokenizer.decode(response))
        return chain, SegState(hidden), tuple(self.tokenizer.decode(text))

    def resolve(
        self, image: GridImage, instruction: Instruction, context: Optional[SceneContext]
    ) -> Tuple[ReasoningChain, SegState]:
        chain, state, _ = self._resolve_traced(image, instruction, context)
        return chain, state

    # heads

    def project_seg(self, state: SegState) -> PromptEmbedding:
        with torch.no_grad():
            hidden = state.hidden.to(self.model.projection.linear.weight.dtype)
            return PromptEmbedding(self.model.projection(hidden))

    def decode_mask(
        self,
        prompt: PromptEmbedding,
        image_features: torch.Tensor,
        image: Optional[GridImage] = None,
    ) -> torch.Tensor:
        """Per-cell probabilities over a (height, width, feature_dim) feature grid."""
        if image_features.dim() != 3:
            raise DimensionMismatch("image features must be (height, width, feature_dim)")
        height, width, channels = image_features.shape
        if image is not None and (height, width) != (image.height, image.width):
            raise DimensionMismatch(
                f"features {height}x{width} do not match image {image.height}x{image.width}"
            )
        with torch.no_grad():
            logits = self.model.decoder(
                prompt.vector.reshape(1, -1), image_features.reshape(1, height * width, channels)
            )
        return torch.sigmoid(logits).reshape(height, width)

    def _soft_mask(
        self, image: GridImage, instruction: Instruction, context: SceneContext
    ) -> Tuple[np.ndarray, ReasoningChain, Tuple[str, ...]]:
        chain, state, tokens = self._resolve_traced(image, instruction, context)
        probs = self.decode_mask(
            self.project_seg(state), self.backbone.encode_image(image), image
        )
        return probs.to(torch.float64).numpy(), chain, tokens

    # pipeline

    def segment(
        self, image: GridImage, instruction: Instruction, sample_id: str = ""
    ) -> SegmentationResult:
        """observe → resolve → project → decode → binarize.

        With context_samples > 1 the mask is the binarized marginal estimate;
        chain and context still come from the greedy pass.
        """
        context = SceneContext.empty()
        stage0: Tuple[str, ...] = ()
        try:
            context, stage0 = self._observe_traced(image)
            probs, chain, stage1 = self._soft_mask(image, instruction, context)
        except (NoSegToken, DecodeOverflow) as e:
            logger.warning(f"No [SEG] for sample {sample_id or image.digest()[:8]}: {e}")
            return SegmentationResult(
                mask=BinaryMask.empty(image.height, image.width),
                chain=ReasoningChain(),
                context=context,
                emitted_seg=False,
                probabilities=np.zeros((image.height, image.width)),
                stage0_tokens=stage0,
                failure=type(e).__name__,
            )
        if self.config.context_samples > 1:
            probs = self.marginal_estimate(image, instruction, self.config.context_samples)
        return SegmentationResult(
            mask=binarize(probs),
            chain=chain,
            context=context,
            emitted_seg=True,
            probabilities=probs,
            stage0_tokens=stage0,
            stage1_tokens=stage1,
        )

    def marginal_estimate(
        self, image: GridImage, instruction: Instruction, k: int, seed: Optional[int] = None
    ) -> np.ndarray:
        """Average soft mask over k sampled Stage-0 contexts."""
        if k < 1:
            raise ValueError("k must be at least 1")
        generator = torch.Generator().manual_seed(self.config.seed if seed is None else seed)
        total = np.zeros((image.height, image.width), dtype=np.float64)
        by_context: Dict[Tuple[int, ...], np.ndarray] = {}
        drawn = 0
        while drawn < k:
            chunk = min(SAMPLE_CHUNK, k - drawn)
            for ids in self._observe_ids([image] * chunk, greedy=False, generator=generator):
                key = tuple(ids)
                if key not in by_context:
                    try:
                        by_context[key] = self._soft_mask(
                            image, instruction, self._to_context(ids)
                        )[0]
                    except (NoSegToken, DecodeOverflow):
                        by_context[key] = np.zeros_like(total)
                total += by_context[key]
            drawn += chunk
        logger.debug(f"Marginal over {k} draws used {len(by_context)} distinct contexts")
        return total / k

    def similarity_matrix(
        self,
        intents: Sequence[Instruction],
        images: Sequence[GridImage],
        regions: Sequence[BinaryMask],
    ) -> np.ndarray:
        """Cosine similarity of intent i's [SEG] direction on image j to image j's target region.

        Directions are compared in decoder feature space (Uᵀ·project_seg(h)). Pairs whose
        resolution emits no [SEG] stay NaN.
        """
        if not intents or not images:
            raise EmptyInput("similarity needs at least one intent and one image")
        if len(intents) != len(images) or len(regions) != len(images):
            raise DimensionMismatch("intents, images and regions must be paired")
        pooled = [
            pooled_region_feature(self.backbone.encode_image(image).numpy(), region)
            for image, region in zip(images, regions)
        ]
        contexts = [self.observe(image) for image in images]
        matrix = np.full((len(intents), len(images)), np.nan)
        for j, image in enumerate(images):
            for i, intent in enumerate(intents):
                try:
                    _, state = self.resolve(image, intent, contexts[j])
                except (NoSegToken, DecodeOverflow) as e:
                    logger.debug(f"similarity [{i}, {j}] skipped: {type(e).__name__}")
                    continue
                with torch.no_grad():
                    direction = self.model.decoder.to_feature_space(self.project_seg(state).vector)
                matrix[i, j] = cosine_similarity(direction.double().numpy(), pooled[j])
        return matrix
