"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: ``UsageError`` and its subclasses to 2,
``BudgetError`` to 3.
"""


class SumprodError(Exception):
    pass


class UsageError(SumprodError, ValueError):
    """Malformed input: bad literal, field mismatch, unbound variable."""


class FieldMismatchError(UsageError):
    pass


class DomainError(SumprodError, ValueError):
    """Mathematically undefined request, e.g. inverting zero."""


class PreconditionError(SumprodError, ValueError):
    """An operation's stated hypothesis does not hold for the given input."""


class BudgetError(SumprodError, RuntimeError):
    """An enumeration would exceed the configured budget."""

    def __init__(self, message, size=None, budget=None):
        super().__init__(message)
        self.size = size
        self.budget = budget


class QuerySyntaxError(UsageError):
    def __init__(self, message, column):
        super().__init__(f"{message} at column {column}")
        self.column = column
