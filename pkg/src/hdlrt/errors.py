"""Exception types shared across the package.

Domain errors (bad designs, degenerate data, failed factorizations) derive
from :class:`HdlrtError`; input-file problems derive from
:class:`InputFileError`.  The CLI maps the former to exit code 2 and the
latter to exit code 1.
"""


class HdlrtError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(HdlrtError):
    """A matrix required to be symmetric positive definite is not."""


class DegenerateColumn(HdlrtError):
    """A variable vector is (numerically) in the span of its predecessors."""


class NegativeEigenvalue(HdlrtError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class SingularMatrix(HdlrtError):
    """LU elimination hit a pivot below tolerance."""


class DimensionExceedsSample(HdlrtError):
    """The dimension p is too large for the available sample size."""


class DimensionMismatch(HdlrtError):
    """Array shapes are incompatible for the requested operation."""


class InvalidDesign(HdlrtError):
    """Test constants requested for an (n, partition) outside the valid range."""


class InvalidAlpha(HdlrtError):
    """Significance level outside the open interval (0, 1)."""


class ZeroVariance(HdlrtError):
    """A variable has (numerically) zero variance; correlations are undefined."""


class InvalidPlan(HdlrtError):
    """A simulation plan violates its own consistency requirements."""


class InputFileError(HdlrtError):
    """Base class for problems with user-supplied data files."""


class ParseError(InputFileError):
    """A CSV cell could not be parsed as a number."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class RaggedRows(ParseError):
    """A CSV row has a different number of fields than the first row."""
