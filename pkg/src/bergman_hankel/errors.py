"""Exception hierarchy shared by all modules.

The CLI maps ``NumericalError`` subclasses to exit code 2 and
``PreconditionError`` subclasses to exit code 3.
"""


class BergmanError(Exception):
    """Base class for every error raised by the toolkit."""


class NumericalError(BergmanError):
    """A computation ran but did not meet its tolerance."""

    def __init__(self, message, best=None, bound=None):
        super().__init__(message)
        self.best = best
        self.bound = bound


class ToleranceError(NumericalError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""


class TruncationError(NumericalError):
    """A kernel series could not be truncated within the requested tolerance."""


class ConvergenceError(NumericalError):
    """An iterative solver (IRLS) did not converge."""


class PreconditionError(BergmanError, ValueError):
    """Inputs violate an operation's preconditions."""


class DomainError(PreconditionError):
    """Argument outside the mathematical domain of the operation."""


class LatticeError(PreconditionError):
    """Lattice or partition of unity fails its validity checks."""


class ResourceError(PreconditionError):
    """The requested computation exceeds the memory/point budget."""

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion
