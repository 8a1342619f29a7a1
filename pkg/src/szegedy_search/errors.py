"""Exception types raised across the package."""


class InvalidSizeError(ValueError):
    """Graph size too small to form a simple graph."""


class DomainError(ValueError):
    """Argument outside the domain of a closed-form expression."""


class NoAbsorptionError(ArithmeticError):
    """Some start vertex can never reach the marked set."""


class CapExceededError(RuntimeError):
    """An iterative or Monte Carlo computation ran past its step cap."""

    def __init__(self, message: str, trial: int | None = None):
        super().__init__(message)
        self.trial = trial


class UnsupportedStructureError(ValueError):
    """Operation requires a graph structure the input does not have."""


class InconsistentBasisError(ValueError):
    """Edge basis does not cover the support of a transition matrix."""


class NoMarkedError(ValueError):
    """A search cost was requested with no marked vertices."""
