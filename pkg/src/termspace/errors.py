"""Exception types shared across the package."""

from __future__ import annotations


class TermspaceError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TermspaceError, ValueError):
    """Invalid input or configuration (maps to CLI exit code 1)."""

    def __init__(self, message: str, *, index: int | None = None):
        super().__init__(message)
        self.index = index


class EmptyInputError(ValidationError):
    """An input file or collection contained no records."""


class ParseError(ValidationError):
    """A file could not be parsed; carries the offending record number.

    ``record`` is the 1-based data record index (header rows excluded),
    ``line`` the 1-based physical line when known.
    """

    def __init__(self, message: str, *, record: int | None = None, line: int | None = None):
        super().__init__(message)
        self.record = record
        self.line = line


class ProviderError(TermspaceError, RuntimeError):
    """A remote embedding provider failed (maps to CLI exit code 2)."""

    def __init__(self, message: str, *, status: int | None = None, index: int | None = None):
        super().__init__(message)
        self.status = status
        self.index = index


class TransientProviderError(ProviderError):
    """Transport failure or retryable status that persisted through all retries."""
