"""Exception hierarchy shared by every module."""

from __future__ import annotations


class EF1Error(Exception):
    """Base class for all package errors."""


class InputError(EF1Error, ValueError):
    """An argument violates an operation's precondition."""


class ValidationError(EF1Error, ValueError):
    """An instance or allocation fails a structural invariant."""


class UnsupportedModeError(EF1Error, ValueError):
    """The operation is not defined for this mode or valuation class."""


class ConstructionError(EF1Error, RuntimeError):
    """A generated instance failed its own consistency checks."""


class ParseError(EF1Error, ValueError):
    """A document could not be parsed.

    ``line`` is 1-based; ``field`` names the offending key when known.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ChecksumError(ParseError):
    """A trace does not belong to the instance it is replayed against."""
