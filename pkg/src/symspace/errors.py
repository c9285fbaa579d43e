"""Exception types raised by symspace."""


class SymspaceError(Exception):
    """Base class for all library errors."""


class InvalidPointError(SymspaceError, ValueError):
    """A value violates the constraints of the space it is supposed to live in."""


class DomainError(SymspaceError, ValueError):
    """A scalar function was applied outside its domain (e.g. log of a nonpositive eigenvalue)."""


class NotPositiveDefiniteError(SymspaceError, ValueError):
    pass


class SingularMatrixError(SymspaceError, ValueError):
    pass


class DimensionError(SymspaceError, ValueError):
    pass


class EigenSolverError(SymspaceError, RuntimeError):
    pass


class NonFiniteLossError(SymspaceError, FloatingPointError):
    pass


class RepresentationOverflowError(SymspaceError, OverflowError):
    """A ray point cannot be represented at the requested parameter; use a smaller t."""
