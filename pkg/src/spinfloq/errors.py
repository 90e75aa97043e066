"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


class IllDefinedInvariantError(ArithmeticError):
    """A topological invariant is requested where the gap closes."""

    def __init__(self, message: str, k: float | None = None):
        super().__init__(message)
        self.k = k


class PreconditionError(ValueError):
    """An operator does not have the structure an algorithm relies on."""


class IntegratorAccuracyError(RuntimeError):
    """Time integration drifted beyond the accepted trace tolerance."""


class PositivityError(RuntimeError):
    """A density matrix acquired a significantly negative eigenvalue."""
