"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its stable contract: 2 for usage and input problems, 3 for
violated mathematical preconditions, 4 for empty results.
"""

from __future__ import annotations


class RidgeAnatomyError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InputError(RidgeAnatomyError):
    """Malformed or unusable input (exit code 2)."""

    exit_code = 2


class DomainError(RidgeAnatomyError):
    """A mathematical precondition does not hold (exit code 3)."""

    exit_code = 3


class EmptyResult(RidgeAnatomyError):
    """A well-posed query that has no answer (exit code 4)."""

    exit_code = 4


class ParseError(InputError):
    """A CSV cell or header could not be parsed.

    ``row`` is the 1-based data row (the header is row 0) and ``col`` the
    1-based column.
    """

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"column {col}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class TooFewRows(InputError):
    """Fewer than k + 2 observations."""


class EmptyGrid(InputError):
    """A λ grid with no points inside the search interval."""


class ShapeMismatch(DomainError):
    """Operands have incompatible shapes."""


class RankDeficient(DomainError):
    """The design matrix is not of full column rank."""


class NotPositiveDefinite(DomainError):
    """A matrix expected to be symmetric positive definite is not."""


class ConstantColumn(DomainError):
    """A predictor column is constant and vanishes on centering."""

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        label = f"{column}" if name is None else f"{column} ({name})"
        super().__init__(f"predictor column {label} is constant")


class LambdaOutOfDomain(DomainError):
    """The ridge parameter is outside the estimator's admissible domain."""


class NegativeLambda(DomainError):
    """A generalized ridge parameter is negative."""


class SpaceMismatch(DomainError):
    """A coefficient vector is tagged with the wrong coefficient space."""


class DegenerateDenominator(DomainError):
    """A criterion denominator vanishes or changes sign."""


class NoSignChange(DomainError):
    """A bracket does not contain a sign change of the target function."""


class DegenerateScenario(DomainError):
    """A simulated mixing probability is exactly 0 or 1."""


class KKTViolation(DomainError):
    """A constrained solution failed its optimality certificate."""


class EmptyClass(EmptyResult):
    """No ridge parameter reproduces the requested coefficient length."""
