"""Domain types shared by every SegWorld module."""

import hashlib
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveInt,
    field_serializer,
    field_validator,
    model_validator,
)

from .exceptions import DimensionMismatch, EmptyGroundTruth

BANDS: Tuple[str, ...] = ("top", "bottom", "left", "right", "interior")


class InstructionKind(str, Enum):
    """Instruction conditions evaluated on Intent2Part."""

    REFERRING = "referring"
    REASONING = "reasoning"
    INTENT = "intent"


TARGET_REFERENTIAL_KINDS: Tuple[InstructionKind, ...] = (
    InstructionKind.REFERRING,
    InstructionKind.REASONING,
)


class GridImage(BaseModel):
    """A synthetic image: a grid of object-token ids, 0 being background."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width: PositiveInt
    height: PositiveInt
    cells: np.ndarray
    feature_dim: PositiveInt

    @field_validator("cells", mode="before")
    @classmethod
    def _coerce_cells(cls, value):
        cells = np.array(value, dtype=np.int64)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-D array")
        if cells.size and cells.min() < 0:
            raise ValueError("token identifiers must be non-negative")
        cells.setflags(write=False)
        return cells

    @model_validator(mode="after")
    def _check_shape(self):
        if self.cells.shape != (self.height, self.width):
            raise DimensionMismatch(
                f"cells shape {self.cells.shape} does not match {self.height}x{self.width}"
            )
        return self

    @field_serializer("cells")
    def _serialize_cells(self, cells: np.ndarray):
        return cells.tolist()

    def object_tokens(self) -> List[int]:
        """Distinct non-background token ids in row-major first-appearance order."""
        seen: List[int] = []
        for token in self.cells.ravel().tolist():
            if token != 0 and token not in seen:
                seen.append(token)
        return seen

    def digest(self) -> str:
        """Stable content hash used as a cache key."""
        payload = f"{self.height}x{self.width}:".encode() + self.cells.tobytes()
        return hashlib.sha1(payload).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, GridImage):
            return NotImplemented
        return (
            self.feature_dim == other.feature_dim
            and self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
        )

    def __hash__(self):
        return hash((self.digest(), self.feature_dim))


class BinaryMask(BaseModel):
    """A 2-D binary mask over the cells of a GridImage."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width: PositiveInt
    height: PositiveInt
    bits: np.ndarray

    @field_validator("bits", mode="before")
    @classmethod
    def _coerce_bits(cls, value):
        raw = np.asarray(value)
        if raw.ndim != 2:
            raise ValueError("bits must be a 2-D array")
        if raw.size and not np.isin(raw, (0, 1)).all():
            raise ValueError("bits must be binary")
        bits = raw.astype(bool)
        bits.setflags(write=False)
        return bits

    @model_validator(mode="after")
    def _check_shape(self):
        if self.bits.shape != (self.height, self.width):
            raise DimensionMismatch(
                f"bits shape {self.bits.shape} does not match {self.height}x{self.width}"
            )
        return self

    @field_serializer("bits")
    def _serialize_bits(self, bits: np.ndarray):
        return bits.astype(int).tolist()

    @classmethod
    def from_array(cls, array) -> "BinaryMask":
        bits = np.asarray(array)
        return cls(width=bits.shape[1], height=bits.shape[0], bits=bits)

    @classmethod
    def empty(cls, height: int, width: int) -> "BinaryMask":
        return cls(width=width, height=height, bits=np.zeros((height, width), dtype=bool))

    @property
    def foreground(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.height, self.width, self.bits.tobytes()))


class Instruction(BaseModel):
    """A tokenized instruction of one kind; raw keeps the authored text."""

    model_config = ConfigDict(frozen=True)

    text: Tuple[str, ...] = Field(min_length=1)
    kind: InstructionKind
    raw: Optional[str] = None


class SceneContext(BaseModel):
    """Stage-0 output: scene sentence, objects, relations and plausible events."""

    model_config = ConfigDict(frozen=True)

    scene: Tuple[str, ...]
    objects: Tuple[str, ...]
    relations: Tuple[Tuple[str, ...], ...]
    events: Tuple[Tuple[str, ...], ...]

    @classmethod
    def empty(cls) -> "SceneContext":
        return cls(scene=(), objects=(), relations=(), events=())

    @property
    def is_empty(self) -> bool:
        return not (self.scene or self.objects or self.relations or self.events)

    @property
    def is_valid_supervision(self) -> bool:
        return len(self.objects) > 0

    def without_events(self) -> "SceneContext":
        return self.model_copy(update={"events": ()})


class ReasoningChain(BaseModel):
    """The latent chain (object, action, part, affordance)."""

    model_config = ConfigDict(frozen=True)

    object: str = ""
    action: str = ""
    part: str = ""
    affordance: str = ""

    @property
    def is_complete(self) -> bool:
        return all((self.object, self.action, self.part, self.affordance))

    def terms(self) -> Dict[str, str]:
        return {
            "object": self.object,
            "action": self.action,
            "part": self.part,
            "affordance": self.affordance,
        }


class Sample(BaseModel):
    """One Intent2Part record."""

    model_config = ConfigDict(frozen=True)

    id: str
    base_image_id: Optional[str] = None
    split: Literal["train", "test"] = "train"
    image: GridImage
    instructions: Dict[InstructionKind, Instruction]
    chain: ReasoningChain
    mask_gt: BinaryMask
    observation: Optional[SceneContext] = None

    @field_validator("instructions")
    @classmethod
    def _check_instructions(cls, value):
        if not value:
            raise ValueError("a sample needs at least one instruction")
        return value

    @model_validator(mode="after")
    def _check_mask(self):
        if (self.mask_gt.height, self.mask_gt.width) != (self.image.height, self.image.width):
            raise DimensionMismatch(f"mask of sample {self.id} does not match its image")
        if self.mask_gt.foreground == 0:
            raise EmptyGroundTruth(f"sample {self.id} has an empty ground-truth mask")
        return self

    def instruction(self, kind: InstructionKind) -> Optional[Instruction]:
        return self.instructions.get(kind)


class LossWeights(BaseModel):
    """Weights of the joint objective."""

    model_config = ConfigDict(frozen=True)

    lambda_mask: NonNegativeFloat = 1.0
    lambda_0: NonNegativeFloat = 0.5
    lambda_1: NonNegativeFloat = 1.0


class ScheduleConfig(BaseModel):
    """Scheduled-sampling curriculum parameters."""

    model_config = ConfigDict(frozen=True)

    warmup_steps: PositiveInt
    p_max: float = Field(default=0.5, ge=0.0, le=1.0)


class ScheduleState(BaseModel):
    """Optimizer step counter driving the curriculum."""

    step: NonNegativeInt = 0

    def advance(self) -> int:
        self.step += 1
        return self.step


class DatasetSplit(BaseModel):
    """Official and leakage-aware test splits."""

    model_config = ConfigDict(frozen=True)

    train: Tuple[str, ...]
    test_official: Tuple[str, ...]
    test_clean: Tuple[str, ...]
    test_overlap: Tuple[str, ...]

    @model_validator(mode="after")
    def _check_partition(self):
        clean, overlap = set(self.test_clean), set(self.test_overlap)
        if clean & overlap:
            raise ValueError("test_clean and test_overlap must be disjoint")
        if clean | overlap != set(self.test_official):
            raise ValueError("test_clean and test_overlap must cover test_official")
        return self

    def ids(self, name: str) -> Tuple[str, ...]:
        return getattr(self, name)


class EvalRecord(BaseModel):
    """Per-sample evaluation outcome."""

    model_config = ConfigDict(frozen=True)

    sample_id: str
    action: str
    emitted_seg: bool
    iou: float = Field(ge=0.0, le=1.0)
    intersection: NonNegativeInt
    union: NonNegativeInt

    @model_validator(mode="after")
    def _check_iou(self):
        if not self.emitted_seg and self.iou != 0.0:
            raise ValueError("a record without [SEG] must score iou 0")
        if self.union > 0 and abs(self.iou - self.intersection / self.union) > 1e-12:
            raise ValueError("iou must equal intersection / union")
        return self


class ActionStats(BaseModel):
    count: PositiveInt
    miou: float = Field(ge=0.0, le=1.0)


class MetricsReport(BaseModel):
    """Aggregate metrics over one evaluation condition."""

    miou: float = Field(ge=0.0, le=1.0)
    ciou: float = Field(ge=0.0, le=1.0)
    seg_rate: float = Field(ge=0.0, le=1.0)
    count: PositiveInt
    per_action: Dict[str, ActionStats]


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: str
    span: str
    field: Optional[str] = None


class ValidationVerdict(BaseModel):
    """Outcome of validating one intent-level instruction."""

    model_config = ConfigDict(frozen=True)

    accepted: bool
    violations: Tuple[Violation, ...] = ()

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.accepted != (len(self.violations) == 0):
            raise ValueError("accepted must hold exactly when there are no violations")
        return self

    @property
    def rules(self) -> List[str]:
        return sorted({violation.rule for violation in self.violations})


class ValidatorRuleSet(BaseModel):
    """Configuration of the intent-instruction validator."""

    model_config = ConfigDict(frozen=True)

    min_words: PositiveInt = 6
    max_words: PositiveInt = 25
    banned_fields: Tuple[str, ...] = ("object", "part", "action", "affordance")
    expand_variants: bool = True
    first_person_patterns: Tuple[str, ...] = ()
    lexicon: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_rules(self):
        if self.min_words > self.max_words:
            raise ValueError("min_words must not exceed max_words")
        missing = {"object", "part", "action", "affordance"} - set(self.banned_fields)
        if missing:
            raise ValueError(f"banned_fields must include {sorted(missing)}")
        return self


class ObjectAffordance(BaseModel):
    """One (action, part, affordance) entry an object supports."""

    model_config = ConfigDict(frozen=True)

    action: str
    part: str
    affordance: str


class Vocabularies(BaseModel):
    """Controlled vocabularies and toy-world metadata (dataset sidecar)."""

    model_config = ConfigDict(frozen=True)

    objects: Tuple[str, ...]
    actions: Tuple[str, ...]
    parts: Tuple[str, ...]
    affordances: Tuple[str, ...]
    relations: Tuple[str, ...] = ("left_of", "right_of", "above", "below")
    scene_words: Tuple[str, ...] = ()
    words: Tuple[str, ...] = ()
    part_regions: Dict[str, Dict[str, Tuple[str, ...]]] = Field(default_factory=dict)
    object_actions: Dict[str, Tuple[ObjectAffordance, ...]] = Field(default_factory=dict)
    relational_actions: Dict[str, str] = Field(default_factory=dict)
    object_scenes: Dict[str, str] = Field(default_factory=dict)

    @field_validator("part_regions")
    @classmethod
    def _check_bands(cls, value):
        for obj, parts in value.items():
            for part, bands in parts.items():
                unknown = set(bands) - set(BANDS)
                if unknown:
                    raise ValueError(f"{obj}.{part} uses unknown bands {sorted(unknown)}")
        return value

    @property
    def feature_dim(self) -> int:
        return len(self.objects) * len(BANDS)


class DecodingMode(str, Enum):
    GREEDY = "greedy"
    SAMPLED = "sampled"


class EngineConfig(BaseModel):
    """Inference knobs; the three drop flags are the ablation rows."""

    model_config = ConfigDict(frozen=True)

    context_samples: PositiveInt = 1
    drop_events: bool = False
    drop_context: bool = False
    drop_stage1_cot: bool = False
    decoding: DecodingMode = DecodingMode.GREEDY
    temperature: float = Field(default=1.0, gt=0.0)
    constrained: bool = True
    seed: int = 0

    def cache_flags(self) -> str:
        return f"events={int(not self.drop_events)}"


class TrainConfig(BaseModel):
    """Flat training configuration; keys match the YAML config file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_mask: NonNegativeFloat = 1.0
    lambda_0: NonNegativeFloat = 0.5
    lambda_1: NonNegativeFloat = 1.0
    warmup_steps: PositiveInt
    p_max: float = Field(default=0.5, ge=0.0, le=1.0)
    intent_mix: float = Field(default=0.0, ge=0.0, le=1.0)
    steps: NonNegativeInt = 600
    learning_rate: float = Field(default=3e-3, gt=0.0)
    weight_decay: NonNegativeFloat = 0.05
    batch_size: PositiveInt = 8
    seed: int = 0
    eval_every: NonNegativeInt = 0
    log_every: PositiveInt = 10
    freeze_backbone: bool = False
    hidden_dim: PositiveInt = 64
    num_layers: PositiveInt = 2
    num_heads: PositiveInt = 4
    prompt_dim: PositiveInt = 32
    drop_events: bool = False
    drop_context: bool = False
    drop_stage1_cot: bool = False
    dataset: Optional[str] = None
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_heads(self):
        if self.hidden_dim % self.num_heads:
            raise ValueError("hidden_dim must be divisible by num_heads")
        return self

    @property
    def weights(self) -> LossWeights:
        return LossWeights(
            lambda_mask=self.lambda_mask, lambda_0=self.lambda_0, lambda_1=self.lambda_1
        )

    @property
    def schedule(self) -> ScheduleConfig:
        return ScheduleConfig(warmup_steps=self.warmup_steps, p_max=self.p_max)

    def engine_config(self, **overrides) -> EngineConfig:
        values = {
            "drop_events": self.drop_events,
            "drop_context": self.drop_context,
            "drop_stage1_cot": self.drop_stage1_cot,
            "seed": self.seed,
        }
        values.update(overrides)
        return EngineConfig(**values)
