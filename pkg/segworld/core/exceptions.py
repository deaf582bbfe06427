"""Exception hierarchy shared by every SegWorld module."""


class SegWorldError(Exception):
    """Base class for all SegWorld errors."""


class MalformedRLE(SegWorldError):
    """Run-length encoding whose runs do not describe the declared grid."""


class DimensionMismatch(SegWorldError):
    """Two grids (masks, features, images) that must agree in shape do not."""


class EmptyGroundTruth(SegWorldError):
    """A ground-truth mask with no foreground cell."""


class EmptyEvaluation(SegWorldError):
    """An aggregate metric was requested over zero records."""


class EmptyInput(SegWorldError):
    """An operation that needs at least one input received none."""


class DecodeOverflow(SegWorldError):
    """A decoding level exceeded its token budget."""


class NoSegToken(SegWorldError):
    """Stage-1 decoding terminated without emitting the [SEG] token."""


class LengthMismatch(SegWorldError):
    """Token log-probabilities and targets are not aligned."""


class NonFiniteLoss(SegWorldError):
    """A training step produced a NaN or infinite loss."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MissingSynthesizedContext(SegWorldError):
    """A training sample has no synthesized Stage-0 context."""


class MissingIntentInstruction(SegWorldError):
    """Intent sampling was requested for a sample without an intent instruction."""


class MissingInstructionKind(SegWorldError):
    """A sample lacks the instruction kind required by the caller."""


class GeneratorFailure(SegWorldError):
    """An observation generator returned an unusable scene context."""


class MissingBaseImageId(SegWorldError):
    """A sample has no base image id, so leakage cannot be assessed."""


class UnreadableFile(SegWorldError):
    """An input file is missing or cannot be read."""


class CheckpointError(SegWorldError):
    """A checkpoint archive is missing entries or has no version."""


class ConfigError(SegWorldError):
    """A configuration file has unknown keys or invalid values."""
