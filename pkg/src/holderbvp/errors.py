"""Exception types raised by the library."""


class HolderBvpError(Exception):
    """Base class for all library errors."""


class DomainError(HolderBvpError):
    """An expression evaluated to a non-finite value on the requested grid."""


class OrderError(HolderBvpError):
    """A grid function does not carry enough derivative layers for the operation."""


class UsageError(HolderBvpError):
    """An operation was called with arguments outside its defined domain."""


class IntegrationError(HolderBvpError):
    """The adaptive integrator failed (step-size underflow or rejected run)."""


class SingularMatriciantError(HolderBvpError):
    """A fundamental matrix became numerically singular on the grid.

    Theory guarantees a nonzero determinant everywhere; hitting this means
    numerical breakdown, not a property of the problem.
    """


class ConvergenceError(HolderBvpError):
    """A fixed-point iteration did not converge within the iteration budget."""


class NotWellPosedError(HolderBvpError):
    """The boundary-value problem is not uniquely solvable.

    Carries the parameter value at which well-posedness failed when raised
    from a parameter study (``eps`` attribute, ``None`` for single problems).
    """

    def __init__(self, message, eps=None):
        super().__init__(message)
        self.eps = eps


class ParseError(HolderBvpError):
    """A problem file or expression string could not be parsed."""


class DimensionError(ParseError):
    """A parsed block has inconsistent dimensions (wrong matrix/vector shape)."""
