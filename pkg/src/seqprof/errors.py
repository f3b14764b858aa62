"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration/usage problems exit with 2,
data and validation problems with 3, training failures with 4.
"""


class SeqprofError(Exception):
    """Base class for all package errors."""


class ConfigError(SeqprofError):
    """Invalid configuration value or combination."""


class InvalidInput(SeqprofError):
    """Operation input violates a precondition (empty sequence, reserved token, ...)."""


class EmptyMatrix(SeqprofError):
    """Confusion matrix with zero total cannot be normalized."""


class InvalidDistribution(SeqprofError):
    """Probability vector with negative entries or wrong total mass."""


class ShapeError(SeqprofError):
    """Array arguments with incompatible shapes or lengths."""


class LengthError(SeqprofError):
    """Sequence longer than the model's configured maximum."""


class RangeError(SeqprofError):
    """Scalar outside its documented domain (score scale, target range)."""


class ParseError(SeqprofError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(SeqprofError):
    """Structurally valid data that violates a semantic invariant."""


class SchemaError(SeqprofError):
    """Reports or tables that cannot be combined (mismatched aspects, bands)."""


class InfiniteLossError(SeqprofError):
    """Cross-entropy/KLD support violation: zero model mass where the target has mass."""


class UndefinedCorrelation(SeqprofError):
    """Pearson correlation requested for a constant input."""


class CheckpointError(SeqprofError):
    """Unreadable, truncated or version-incompatible model checkpoint."""


class TrainingError(SeqprofError):
    """Training loop failed; carries the pipeline stage name when raised there."""

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"stage '{stage}': {message}"
        super().__init__(message)
        self.stage = stage
