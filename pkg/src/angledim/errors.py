"""Exception types raised across the package.

All of them derive from :class:`AngleDimError`, which itself is a
``ValueError`` so callers that only care about bad input can catch that.
"""


class AngleDimError(ValueError):
    """Base class for every error raised by angledim."""


class DomainError(AngleDimError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientSampleError(AngleDimError):
    """Too few usable points for the requested neighbourhood size."""


class CalibrationMismatchError(AngleDimError):
    """A calibration cache does not match the estimator configuration."""


class ConfigurationError(AngleDimError):
    """Invalid estimator or generator configuration."""


class DegenerateDataError(AngleDimError):
    """Zero distances or similar degeneracies make an estimate undefined."""


class ParseError(AngleDimError):
    """Malformed point-cloud input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ParseError):
    """Well-formed input carrying invalid values (NaN, inf, wrong width)."""


class EmptyInputError(ParseError):
    """The input contained no points."""
