"""Exception types shared across the package."""


class IngestError(Exception):
    """A file could not be read into a valid in-memory object."""


class ArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class NumericError(ValueError):
    """Numeric input is outside the domain an operation can handle."""
