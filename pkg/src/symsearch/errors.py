"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SymSearchError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SymSearchError, ValueError):
    """An argument is outside the documented domain."""


class UnsupportedFamilyError(InvalidParameterError):
    """The requested operation has no closed form for this graph family."""


class ParseError(SymSearchError, ValueError):
    """Malformed text input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceLimitError(SymSearchError, RuntimeError):
    """Input exceeds a configured size cap."""


class PartialResultError(SymSearchError, RuntimeError):
    """A search stopped early; whatever it found is not a complete answer."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class NumericFailureError(SymSearchError, ArithmeticError):
    """An iterative numerical routine failed to converge."""
