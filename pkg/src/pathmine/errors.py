"""Exception types shared across the package."""

from __future__ import annotations


class PathmineError(Exception):
    """Base class for all package-specific errors."""


class ParseError(PathmineError):
    """A flat input file could not be parsed."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = str(path) if path is not None else ""
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class NegativeDay(ParseError):
    """A fact carries a negative day number."""


class DuplicateCode(PathmineError):
    """Two attribute rows disagree about the same delivery code."""


class CycleError(PathmineError):
    """The code taxonomy contains a cycle."""


class UnknownCode(PathmineError):
    """A delivery code has no row in the attribute table."""


class QueryError(PathmineError):
    """Base class for query parsing and compilation failures."""


class QuerySyntaxError(QueryError):
    """The query text violates the grammar."""

    def __init__(self, message: str, *, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DuplicateClause(QueryError):
    """A clause that must appear exactly once appears twice."""


class MissingClause(QueryError):
    """A required clause is absent."""


class InvalidQuery(QueryError):
    """The query parses but violates a semantic invariant."""


class UnknownAttribute(QueryError):
    """A constraint or projection names an attribute outside the item schema."""


class EmptyClassFilter(QueryError):
    """No delivery code in the knowledge base can ever match the class filter."""


class MissingNegativeWindow(PathmineError):
    """A discriminative evaluation was requested on a database without negative sequences."""


class TooLarge(PathmineError):
    """The reference oracle refuses an enumeration beyond its candidate guard."""


class InvalidPlantSpec(PathmineError):
    """A synthetic-cohort plant description is malformed or infeasible."""
