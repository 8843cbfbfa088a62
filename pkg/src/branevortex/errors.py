"""Exception types shared across the solver modules."""


class BraneVortexError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BraneVortexError, ValueError):
    """A parameter lies outside its mathematically admissible range."""


class ShapeError(BraneVortexError, ValueError):
    """A field stack or vector has the wrong number of components."""


class SolvabilityError(BraneVortexError, ValueError):
    """The right-hand side violates a compatibility condition (e.g. nonzero
    mean on the torus)."""


class ExistenceGateError(BraneVortexError, RuntimeError):
    """The doubly periodic problem has no solution for the requested vortex
    numbers; raised before any iteration is attempted."""


class DivergingIterateError(BraneVortexError, FloatingPointError):
    """An iterate produced exponents beyond floating-point range; a smaller
    step is required."""


class NonConvergenceError(BraneVortexError, RuntimeError):
    """The outer iteration hit its cap before reaching the tolerance.

    Carries the iteration history so the failure can be inspected.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class NotConvergedError(BraneVortexError, RuntimeError):
    """A diagnostic was requested on a result that never converged."""


class WrongDomainError(BraneVortexError, TypeError):
    """A torus-only diagnostic was invoked on a planar result or vice versa."""


class DecayUnderflowError(BraneVortexError, ValueError):
    """The requested decay-fit window contains values at the round-off floor;
    the window must be moved inward."""
