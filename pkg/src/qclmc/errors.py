"""Exception hierarchy shared across the package."""

from __future__ import annotations


class QclmcError(Exception):
    """Base class for all package errors."""


class InvalidArgument(QclmcError, ValueError):
    """An argument violates a documented precondition."""


class InvalidPath(QclmcError, ValueError):
    """A level path cannot be used (e.g. zero-length level step)."""


class ModelError(QclmcError, ArithmeticError):
    """The level-process model produced an unusable state."""


class CappedPathError(QclmcError):
    """A path hit its refinement cap before reaching the requested level.

    The partial path is attached so the caller can decide whether to use it.
    """

    def __init__(self, message: str, path) -> None:
        super().__init__(message)
        self.path = path


class DivergentBound(QclmcError, ValueError):
    """A closed-form bound is infinite for the given rate parameters."""


class DegenerateData(QclmcError, ValueError):
    """Regression input contains values whose logarithm is undefined."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class BudgetExceeded(QclmcError):
    """An adaptive procedure ran out of its cost budget."""

    def __init__(self, message: str, partial: float) -> None:
        super().__init__(message)
        self.partial = partial
