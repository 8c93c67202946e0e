"""Exception types shared across the package.

Everything raised on purpose derives from KaczmarzError so callers (and the
CLI) can catch one base class and map it to an input-error exit code. Plain
IndexError is used for out-of-range row/column indices, matching how numpy
itself reports them.
"""


class KaczmarzError(Exception):
    """Base class for errors raised by this package."""


class AllZeroMatrixError(KaczmarzError, ValueError):
    """No nonzero entry survived construction (row/column sampling is undefined)."""


class DimensionMismatchError(KaczmarzError, ValueError):
    """Operand shapes do not line up."""


class NonFiniteError(KaczmarzError, ValueError):
    """An input contains NaN or an infinity."""


class DegenerateWeightsError(KaczmarzError, ValueError):
    """Sampling weights are empty, negative, non-finite, or sum to zero."""


class InvalidRangeError(KaczmarzError, ValueError):
    """A numeric parameter is outside its documented range."""


class TooLargeError(KaczmarzError, ValueError):
    """Instance exceeds the dense-work cap of the reference oracle."""


class DegenerateDensityError(KaczmarzError, ValueError):
    """The sparse generator kept drawing all-zero matrices."""


class MatrixMarketError(KaczmarzError, ValueError):
    """Malformed Matrix Market input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class UnsupportedFormatError(MatrixMarketError):
    """Valid Matrix Market header, but outside the supported subset."""
