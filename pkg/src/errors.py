"""Exception hierarchy for the manifold function encoder.

Every error carries the process exit code the CLI should use for it:
2 usage, 3 data/validation, 4 numerical failure.
"""

from typing import Optional


class MFEError(Exception):
    """Base class for all encoder errors."""

    exit_code: int = 1


class UsageError(MFEError):
    exit_code = 2


class DataError(MFEError, ValueError):
    """Bad input data, files or arguments that fail validation."""

    exit_code = 3


class NumericalError(MFEError, ArithmeticError):
    """A numerical routine failed (factorization, divergence, ...)."""

    exit_code = 4


# basis
class UnsupportedDimensionError(DataError):
    pass


class InvalidOrderError(DataError):
    pass


class IndexOutOfRangeError(DataError):
    pass


class PointOutOfDomainError(DataError):
    pass


class UnsupportedOrderError(DataError):
    pass


class SolverFailureError(NumericalError):
    pass


class NonSPDError(NumericalError):
    pass


class QuadratureDegreeError(NumericalError):
    pass


# geometry
class DegenerateSimplexError(DataError):
    pass


class DegreeUnsupportedError(DataError):
    pass


# encoder / decoder
class DimensionMismatchError(DataError):
    pass


class PeriodicBoundaryContactError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class WeightNormalizationError(DataError):
    pass


class MixedNormalizationError(DataError):
    pass


class BlockNotPresentError(DataError):
    pass


# analysis
class BallExitsDomainError(DataError):
    pass


class InsufficientPointsError(DataError):
    pass


class AllErrorsAtFloorError(DataError):
    pass


# neuralop
class WidthMismatchError(DataError):
    pass


class AllTargetsDegenerateError(DataError):
    pass


class DivergenceError(NumericalError):
    pass


# files
class ParseError(DataError):
    """A file could not be parsed; carries the offending line and/or field."""

    def __init__(
        self, message: str, line: Optional[int] = None, field: Optional[str] = None
    ):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class ValidationFailedError(DataError):
    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class HashMismatchError(DataError):
    pass


class TruncatedPayloadError(DataError):
    pass


class UnsupportedVersionError(DataError):
    pass
