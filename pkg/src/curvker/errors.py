"""Exception types raised across the package."""


class CurvkerError(Exception):
    """Base class for all library errors."""


class ParameterError(CurvkerError, ValueError):
    """An argument lies outside the documented domain."""


class DegenerateTripleError(CurvkerError, ValueError):
    """Two points of a triple coincide (or a required denominator vanishes)."""


class KernelSingularityError(CurvkerError, ValueError):
    """A kernel was evaluated at the origin."""


class MeasureError(CurvkerError, ValueError):
    """A measure violates its invariants or an operation has nothing to work on."""


class MeasureFileError(MeasureError):
    """A measure file could not be parsed.

    ``line`` carries the 1-based line number when it is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InconsistencyError(CurvkerError):
    """A computed result contradicts an identity or bound it must satisfy."""
