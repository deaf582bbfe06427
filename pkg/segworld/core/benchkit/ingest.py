"""JSON-lines dataset ingestion with per-line diagnostics.

A dataset ``name.jsonl`` is read together with its vocabulary sidecar
``name.vocab.json``. Each line is one record::

    {"id": ..., "base_image_id": ..., "split": "train" | "test",
     "image": {"width": w, "height": h, "cells": [[...], ...]},
     "instructions": {"referring": "...", "reasoning": "...", "intent": "..."},
     "chain": {"object": ..., "action": ..., "part": ..., "affordance": ...},
     "mask": {"width": w, "height": h, "counts": [...]},
     "observation": {"scene": [...], "objects": [...], "relations": [...], "events": [...]}}

Bad lines never abort ingestion; they are skipped and reported.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from ..exceptions import DimensionMismatch, EmptyGroundTruth, MalformedRLE, UnreadableFile
from ..models import (
    Instruction,
    InstructionKind,
    ReasoningChain,
    Sample,
    SceneContext,
    ValidatorRuleSet,
    Vocabularies,
)
from ..rle import decode_runs, rle_to_dict
from ..tokenizer import Tokenizer, normalize_words
from .observation import RuleBasedDescriber, synthesize_observation
from .validator import IntentValidator, default_rules

logger = logging.getLogger(__name__)

MALFORMED_RECORD = "MalformedRecord"
MALFORMED_RLE = "MalformedRLE"
EMPTY_MASK = "EmptyMask"
MISSING_CHAIN_FIELD = "MissingChainField"
UNKNOWN_CHAIN_TERM = "UnknownChainTerm"
DIMENSION_MISMATCH = "DimensionMismatch"
VALIDATOR_REJECTED = "ValidatorRejected"
FILLED_OBSERVATION = "FilledObservation"

CHAIN_FIELDS = ("object", "action", "part", "affordance")
CHAIN_VOCABULARIES = {
    "object": "objects",
    "action": "actions",
    "part": "parts",
    "affordance": "affordances",
}


class Diagnostic(BaseModel):
    """One ingestion finding; errors reject the line, warnings do not."""

    model_config = ConfigDict(frozen=True)

    line: int
    sample_id: Optional[str] = None
    code: str
    message: str
    severity: str = "error"
    rule: Optional[str] = None
    span: Optional[str] = None


@dataclass
class IngestResult:
    samples: List[Sample]
    diagnostics: List[Diagnostic]
    vocabularies: Vocabularies
    path: Optional[Path] = None
    lines: int = 0
    rejected_lines: List[int] = field(default_factory=list)

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def rejected(self) -> int:
        return len(self.rejected_lines)


class _Reject(Exception):
    def __init__(self, *diagnostics: Diagnostic):
        super().__init__(diagnostics[0].message)
        self.diagnostics = diagnostics


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.vocab.json")


def load_vocabularies(path: Union[str, Path]) -> Vocabularies:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise UnreadableFile(f"cannot read vocabulary sidecar {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise UnreadableFile(f"vocabulary sidecar {path} is not valid JSON: {e}") from e
    try:
        return Vocabularies.model_validate(raw)
    except ValidationError as e:
        raise UnreadableFile(f"vocabulary sidecar {path} is invalid: {e}") from e


def write_vocabularies(vocabularies: Vocabularies, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(vocabularies.model_dump(mode="json"), indent=2, sort_keys=True))
    return path


def sample_to_record(sample: Sample) -> Dict[str, Any]:
    """Inverse of the record parser, used by dataset writers."""
    return {
        "id": sample.id,
        "base_image_id": sample.base_image_id,
        "split": sample.split,
        "image": {
            "width": sample.image.width,
            "height": sample.image.height,
            "cells": sample.image.cells.tolist(),
        },
        "instructions": {
            kind.value: instruction.raw or " ".join(instruction.text)
            for kind, instruction in sample.instructions.items()
        },
        "chain": sample.chain.terms(),
        "mask": rle_to_dict(sample.mask_gt),
        "observation": sample.observation.model_dump(mode="json") if sample.observation else None,
    }


class DatasetIngestor:
    """Parses records against a vocabulary and the intent validator."""

    def __init__(
        self,
        vocabularies: Vocabularies,
        rules: Optional[ValidatorRuleSet] = None,
        fill_observations: bool = True,
    ):
        self.vocabularies = vocabularies
        self.tokenizer = Tokenizer(vocabularies)
        self.validator = IntentValidator(rules or default_rules())
        self.describer = RuleBasedDescriber(vocabularies) if fill_observations else None

    def _diagnostic(self, line: int, sample_id: Optional[str], code: str, message: str, **kw):
        return Diagnostic(line=line, sample_id=sample_id, code=code, message=message, **kw)

    def _chain(self, line: int, sample_id: str, raw: Any) -> ReasoningChain:
        raw = raw if isinstance(raw, dict) else {}
        missing = [name for name in CHAIN_FIELDS if not raw.get(name)]
        if missing:
            raise _Reject(
                self._diagnostic(
                    line, sample_id, MISSING_CHAIN_FIELD, f"chain lacks {', '.join(missing)}"
                )
            )
        values = {name: str(raw[name]) for name in CHAIN_FIELDS}
        unknown = [
            self._diagnostic(
                line,
                sample_id,
                UNKNOWN_CHAIN_TERM,
                f"chain {name} {values[name]!r} is not in the {vocabulary} vocabulary",
            )
            for name, vocabulary in CHAIN_VOCABULARIES.items()
            if values[name] not in getattr(self.vocabularies, vocabulary)
        ]
        if unknown:
            raise _Reject(*unknown)
        return ReasoningChain(**values)

    def _instructions(self, raw: Any) -> Dict[InstructionKind, Instruction]:
        if not isinstance(raw, dict):
            raise ValueError("instructions must map kind to text")
        return {
            InstructionKind(kind): Instruction(
                text=tuple(normalize_words(text)), kind=InstructionKind(kind), raw=text
            )
            for kind, text in raw.items()
        }

    def _check_intent(
        self, line: int, sample_id: str, instructions: Dict[InstructionKind, Instruction], chain
    ) -> None:
        intent = instructions.get(InstructionKind.INTENT)
        if intent is None:
            return
        verdict = self.validator.validate(intent.raw or " ".join(intent.text), chain)
        if not verdict.accepted:
            raise _Reject(
                *(
                    self._diagnostic(
                        line,
                        sample_id,
                        VALIDATOR_REJECTED,
                        f"intent instruction fails {v.rule}: {v.span!r}",
                        rule=v.rule,
                        span=v.span,
                    )
                    for v in verdict.violations
                )
            )

    def parse_record(self, line: int, record: Any) -> tuple:
        """Return (sample, warnings); raise _Reject on a bad record."""
        if not isinstance(record, dict):
            raise _Reject(self._diagnostic(line, None, MALFORMED_RECORD, "record is not an object"))
        sample_id = str(record.get("id", f"line-{line}"))
        chain = self._chain(line, sample_id, record.get("chain"))
        try:
            mask_raw = record["mask"]
            mask = decode_runs(mask_raw["width"], mask_raw["height"], mask_raw["counts"])
        except MalformedRLE as e:
            raise _Reject(self._diagnostic(line, sample_id, MALFORMED_RLE, str(e)))
        except (KeyError, TypeError) as e:
            raise _Reject(
                self._diagnostic(line, sample_id, MALFORMED_RLE, f"mask is incomplete: {e}")
            )

        warnings: List[Diagnostic] = []
        try:
            instructions = self._instructions(record.get("instructions"))
            self._check_intent(line, sample_id, instructions, chain)
            image_raw = record["image"]
            image_fields = {
                "width": image_raw["width"],
                "height": image_raw["height"],
                "cells": image_raw["cells"],
                "feature_dim": self.vocabularies.feature_dim,
            }
            split = record.get("split", "train")
            observation = None
            if split == "train" and record.get("observation"):
                observation = SceneContext.model_validate(record["observation"])
            sample = Sample(
                id=sample_id,
                base_image_id=record.get("base_image_id"),
                split=split,
                image=image_fields,
                instructions=instructions,
                chain=chain,
                mask_gt=mask,
                observation=observation,
            )
        except EmptyGroundTruth as e:
            raise _Reject(self._diagnostic(line, sample_id, EMPTY_MASK, str(e)))
        except DimensionMismatch as e:
            raise _Reject(self._diagnostic(line, sample_id, DIMENSION_MISMATCH, str(e)))
        except (ValidationError, ValueError, KeyError, TypeError, AttributeError) as e:
            raise _Reject(self._diagnostic(line, sample_id, MALFORMED_RECORD, str(e)))

        unknown = [t for t in sample.image.object_tokens() if not self.tokenizer.is_object(t)]
        if unknown:
            raise _Reject(
                self._diagnostic(
                    line, sample_id, MALFORMED_RECORD, f"cells hold non-object tokens {unknown}"
                )
            )

        if sample.split == "train" and sample.observation is None and self.describer:
            filled = synthesize_observation(sample.image, self.describer)
            sample = sample.model_copy(update={"observation": filled})
            warnings.append(
                self._diagnostic(
                    line,
                    sample_id,
                    FILLED_OBSERVATION,
                    "missing observation filled by the rule-based describer",
                    severity="warning",
                )
            )
        return sample, warnings

    def ingest_lines(self, lines: Iterable[str]) -> IngestResult:
        samples: List[Sample] = []
        diagnostics: List[Diagnostic] = []
        rejected: List[int] = []
        count = 0
        for number, text in enumerate(lines, start=1):
            if not text.strip():
                continue
            count += 1
            try:
                record = json.loads(text)
                sample, warnings = self.parse_record(number, record)
            except json.JSONDecodeError as e:
                diagnostics.append(
                    self._diagnostic(number, None, MALFORMED_RECORD, f"invalid JSON: {e}")
                )
                rejected.append(number)
                continue
            except _Reject as reject:
                diagnostics.extend(reject.diagnostics)
                rejected.append(number)
                continue
            samples.append(sample)
            diagnostics.extend(warnings)
        if rejected:
            logger.warning(f"Rejected {len(rejected)} of {count} records")
        return IngestResult(
            samples=samples,
            diagnostics=diagnostics,
            vocabularies=self.vocabularies,
            lines=count,
            rejected_lines=rejected,
        )


def ingest_dataset(
    path: Union[str, Path],
    rules: Optional[ValidatorRuleSet] = None,
    vocabularies: Optional[Vocabularies] = None,
) -> IngestResult:
    """Read a JSON-lines dataset and its sidecar into validated samples."""
    path = Path(path)
    if not path.is_file():
        raise UnreadableFile(f"dataset {path} does not exist")
    vocabularies = vocabularies or load_vocabularies(sidecar_path(path))
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise UnreadableFile(f"cannot read dataset {path}: {e}") from e
    result = DatasetIngestor(vocabularies, rules).ingest_lines(text.splitlines())
    result.path = path
    logger.info(f"Ingested {len(result.samples)} samples from {path}")
    return result


def write_diagnostics(diagnostics: Iterable[Diagnostic], path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for diagnostic in diagnostics:
            f.write(json.dumps(diagnostic.model_dump(mode="json"), sort_keys=True) + "\n")
    return path
