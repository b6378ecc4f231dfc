"""Exception hierarchy shared by all cqmine modules."""

from __future__ import annotations


class CqmineError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(CqmineError):
    """Raised when a schema file is malformed or internally inconsistent."""


class DataError(CqmineError):
    """Raised when relation data files are missing or do not fit the schema."""


class QueryError(CqmineError):
    """Raised when a query cannot be parsed or violates a query invariant."""


class ConfigError(CqmineError):
    """Raised when mining parameters are out of range or inconsistent."""
