"""Exception hierarchy shared across the toolkit.

``ValidationError`` covers everything caused by bad inputs (malformed files,
violated invariants, mismatched ids); the CLI maps it to exit code 1 while
any other exception is an internal error (exit code 2).
"""


class StormtopicsError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(StormtopicsError):
    """Input data or configuration violates a documented contract."""
