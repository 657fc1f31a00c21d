"""Exception hierarchy for ctlasso.

Data/usage problems raise subclasses of :class:`CtLassoError`; numerical
failures raise subclasses of :class:`NumericalError` so callers (notably the
CLI) can map them to distinct exit codes.
"""


class CtLassoError(Exception):
    """Base class for all ctlasso errors."""


class DimensionMismatch(CtLassoError):
    """Array shapes do not agree."""


class ConstantColumn(CtLassoError):
    """A predictor column has zero variance and cannot be standardized."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} is constant (zero variance)")


class TooFewSamples(CtLassoError):
    """Not enough rows for the requested operation."""


class EmptySubset(CtLassoError):
    """An index subset that must be non-empty was empty."""


class LambdaBelowPath(CtLassoError):
    """Requested penalty lies below the computed end of the solution path."""


class ZeroInitialEstimate(CtLassoError):
    """An adaptive-lasso initial estimate is numerically zero."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"initial estimate for column {column} is zero")


class DegenerateTruth(CtLassoError):
    """True coefficient vector is all-zero or all-nonzero; selection metrics undefined."""


class InvalidRho(CtLassoError):
    """Correlation parameter outside (-1, 1)."""


class NotPsd(CtLassoError):
    """Matrix is not positive semi-definite where required."""


class NumericalError(CtLassoError):
    """Base class for numerical failures (CLI exit code 3)."""


class SingularActiveSubmatrix(NumericalError):
    """The linear solve for the path direction failed on the active submatrix."""


class SingularSS(NumericalError):
    """The true-variable covariance submatrix is singular."""


class NotConverged(NumericalError):
    """Iterative solver hit its iteration cap before converging."""


class IndefiniteMatrix(NumericalError):
    """Coordinate descent detected an indefinite quadratic form."""


class CholeskyFailure(NumericalError):
    """Cholesky factorization failed; matrix not positive definite."""
