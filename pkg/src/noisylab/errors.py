"""Exception types shared across the package."""


class NoisylabError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(NoisylabError):
    """Operands have incompatible dimensions."""


class NonFiniteError(NoisylabError):
    """A matrix contains NaN or Inf where finite values are required."""


class DegenerateInputError(NoisylabError):
    """Input is structurally valid but degenerate (e.g. zero-norm vector)."""


class DeterminismError(NoisylabError):
    """A function declared deterministic returned different values on repeat."""


class ConfigError(NoisylabError):
    """Invalid configuration value or combination."""


class DataFormatError(NoisylabError):
    """A data file does not conform to the documented format."""


class EmptyDatasetError(NoisylabError):
    """An operation that needs at least one instance got none."""


class BatchSizeError(NoisylabError):
    """Batch too small for the requested operation (batchnorm/contrastive)."""


class TrainingDivergedError(NoisylabError):
    """Non-finite values appeared during optimization.

    Carries the partially filled run report so interrupted runs stay usable.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
