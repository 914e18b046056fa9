"""Exception hierarchy shared by all modules."""


class CocycleError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(CocycleError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class DomainError(CocycleError, ValueError):
    """An input lies outside the set where the operation is defined."""


class BoundaryAtInfinityError(DomainError):
    """The Möbius denominator CZ+D is singular (or numerically so)."""


class PhaseUnwrapError(CocycleError, RuntimeError):
    """A phase continuation could not be refined below the step bound."""


class ConvergenceError(CocycleError, RuntimeError):
    """A fixed-point iteration did not converge.

    The last Cauchy residual is stored in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AnchorError(CocycleError, RuntimeError):
    """The continuation anchor is not close enough to block-diagonal."""


class ConditioningError(CocycleError, RuntimeError):
    """A linear-algebra step is too ill-conditioned to be trusted."""


class NumericError(CocycleError, ArithmeticError):
    """Overflow or another floating point failure."""


class AmbiguityError(CocycleError, ValueError):
    """A nearest-match identification is not unique enough."""


class InvalidStripError(CocycleError, ValueError):
    """A strip index set is not connected or otherwise malformed."""


class PreconditionError(CocycleError, ValueError):
    """A documented precondition of a diagnostic is violated."""


class NonCanonicalSubspaceError(CocycleError, ValueError):
    """The Hermitian symplectic form is degenerate on the subspace."""
