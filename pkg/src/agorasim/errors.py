"""Exception types shared across the package."""

from __future__ import annotations


class AgorasimError(Exception):
    """Base class for all library errors."""


class DomainMismatch(AgorasimError):
    """A morphism or functor was applied outside its declared domain."""

    def __init__(self, who: str, message: str):
        self.who = who
        super().__init__(f"{who}: {message}")


class UnitMismatch(AgorasimError):
    """Numeric property values with different unit tags were combined."""


class NonFiniteWeight(AgorasimError):
    """A valuation weight is NaN or infinite."""


class MissingDistance(AgorasimError):
    """A table metric has no entry for the requested pair of points."""


class InsufficientSamples(AgorasimError):
    """Too few samples for the requested law check."""


class NonPositiveCount(AgorasimError):
    """Bundle sizes must be integers >= 1."""


class MissingAttribute(AgorasimError):
    """An agent lacks the attribute a segment analysis groups by."""


class NotOwner(AgorasimError):
    """The proposed seller does not own the object."""


class SearchBudgetExceeded(AgorasimError):
    """A design search ran out of candidate evaluations.

    Carries the best result found before the budget ran out.
    """

    def __init__(self, best, evaluated: int):
        self.best = best
        self.evaluated = evaluated
        super().__init__(f"search budget exhausted after {evaluated} evaluations")


class ParseError(AgorasimError):
    """A scenario file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = "" if line is None else f" (line {line}, column {column})"
        super().__init__(f"{message}{where}")


class ValidationError(AgorasimError):
    """A scenario parsed but failed validation.

    ``errors`` lists every problem found, not just the first.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UnknownCommand(AgorasimError):
    """dispatch() was given a command it does not know."""
