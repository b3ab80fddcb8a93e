class PolaritonError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PolaritonError, ValueError):
    """A formula was evaluated outside the region where it is real/defined."""


class ValidationError(PolaritonError, ValueError):
    """Invalid user-supplied parameters or data."""


class FitError(PolaritonError):
    """A fit could not be attempted (e.g. too few points)."""
