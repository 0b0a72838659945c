"""Exception types shared across the package."""


class EviNamError(Exception):
    """Base class for every error this package raises on purpose."""


class ShapeError(EviNamError):
    """Operands or inputs have non-conforming shapes."""


class DomainError(EviNamError):
    """A value lies outside an operation's numeric domain."""


class InvalidInputError(EviNamError):
    """A caller-supplied argument is malformed."""


class ConfigError(EviNamError):
    """A configuration value violates its contract."""


class DataError(EviNamError):
    """Dataset ingestion, parsing, or schema validation failed."""


class DivergenceError(EviNamError):
    """Training produced a non-finite loss or gradient.

    Carries the partial training report so callers can inspect the loss
    history up to the point of failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ModelFormatError(EviNamError):
    """A model file is corrupt, truncated, or has an unsupported version."""
