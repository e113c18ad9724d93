"""Exception types shared across the package."""


class CycsidError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(CycsidError):
    """Matrix or vector dimensions are inconsistent."""


class NonSquareError(CycsidError):
    """A square matrix was required."""


class SingularMatrixError(CycsidError):
    """Matrix is numerically rank deficient where regularity is required."""


class InvalidRateError(CycsidError):
    """A sensor rate must be a positive integer."""


class RankDeficientAError(CycsidError):
    """The state matrix must have full rank for the multirate analysis."""


class MalformedCycledSignalError(CycsidError):
    """A cycled sample has mass outside its active block."""


class InsufficientDataError(CycsidError):
    """Not enough samples for the requested operation."""


class ExcitationDeficientError(CycsidError):
    """Input data is not persistently exciting at the required order."""


class RankConditionError(CycsidError):
    """A selector matrix violates its full-rank condition."""


class StructureViolationError(CycsidError):
    """A matrix failed a required structural check."""


class AssumptionFailedError(CycsidError):
    """No sampling phase yields an observable masked output pair."""


class ParseError(CycsidError):
    """A file could not be parsed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class SchemaError(CycsidError):
    """A parsed file is missing or mistypes a required field."""
