"""Exception hierarchy shared by every shearlab module."""

from __future__ import annotations


class ShearlabError(Exception):
    """Base class for all errors raised by shearlab."""


# -- expression DSL ---------------------------------------------------------


class ParseError(ShearlabError):
    """Syntax error in an expression, with 1-based line/column."""

    def __init__(self, message: str, line: int, column: int, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)
        self.message = message


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, line: int, column: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", line, column)


class ArityError(ParseError):
    def __init__(self, name: str, got: int, line: int, column: int):
        self.name = name
        super().__init__(
            f"function {name!r} takes exactly 1 argument, got {got}", line, column
        )


class DomainError(ShearlabError):
    """Evaluation left the domain of a node (log of 0, division by 0, ...)."""

    def __init__(self, node: str, value: float, reason: str):
        self.node = node
        self.value = value
        super().__init__(f"{reason} in {node!r} (argument value {value!r})")


# -- ambient metric -----------------------------------------------------------


class DegenerateMetricError(ShearlabError):
    pass


class SignatureMismatchError(ShearlabError):
    pass


# -- immersion ------------------------------------------------------------------


class NotImmersedError(ShearlabError):
    pass


class NotSpacelikeError(ShearlabError):
    pass


class DegenerateNormalMetricError(ShearlabError):
    pass


# -- shear engine ---------------------------------------------------------------


class UmbilicalVerificationError(ShearlabError):
    pass


class CrossCheckMismatchError(ShearlabError):
    """The independent rank criteria disagree at a point.

    ``report`` carries the partially filled :class:`~shearlab.shear.ShearReport`
    so callers can inspect the singular-value margins.
    """

    def __init__(self, message: str, failed, report=None):
        self.failed = tuple(failed)
        self.report = report
        super().__init__(message)


# -- catalog / spec files -------------------------------------------------------


class UnknownEntryError(ShearlabError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class SpecFileError(ShearlabError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
