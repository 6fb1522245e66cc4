"""Exception types raised across the package."""


class RmeeError(Exception):
    """Base class for all errors raised by :mod:`rmee`."""


class InvalidParameterError(RmeeError, ValueError):
    """A hyper-parameter or configuration value is out of its valid range."""


class InvalidInputError(RmeeError, ValueError):
    """Input data is empty, malformed or has mismatched dimensions."""


class NumericFailure(RmeeError, FloatingPointError):
    """A fit produced non-finite values and was aborted."""
