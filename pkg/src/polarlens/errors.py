"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: missing inputs exit 2, validation
failures exit 3, anything else exit 4.
"""


class PolarlensError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(PolarlensError, ValueError):
    """An argument violates an operation's contract."""


class NotFoundError(PolarlensError, LookupError):
    """A referenced entity (user, conversation) is absent."""


class NumericError(PolarlensError, ArithmeticError):
    """A computation produced non-finite values."""


class MalformedRecordError(PolarlensError, ValueError):
    """A corpus record failed validation in strict mode."""


class MissingInputError(PolarlensError, FileNotFoundError):
    """A required input path does not exist."""
