"""Exception types shared across the package."""


class PCError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PCError):
    """A raw circuit description was rejected.

    ``reason`` is a stable machine-readable code (e.g. ``"cycle"``,
    ``"dangling-child"``, ``"weight-sum"``); the message carries detail.
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class PropertyError(PCError):
    """A structural prerequisite (smoothness, decomposability, determinism) is unmet."""


class BudgetError(PCError):
    """An exhaustive operation was refused because it exceeds the enumeration budget."""


class DivergenceDomainError(PCError):
    """A mass ratio fell outside a divergence generator's domain."""

    def __init__(self, message: str, assignment=None, ratio=None):
        super().__init__(message)
        self.assignment = assignment
        self.ratio = ratio


class EmptySupportError(PCError):
    """Pruning removed every accepting path of the circuit."""


class BoundViolationError(PCError):
    """A guaranteed inequality failed on a concrete instance."""
