"""Exception hierarchy shared by all modules."""


class UmoeadError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(UmoeadError, ValueError):
    """Invalid sizes, counts, options or configuration files."""


class DomainError(UmoeadError, ValueError):
    """An input lies outside the domain of an operation."""


class NotAvailableError(UmoeadError, LookupError):
    """The requested closed form or feature does not exist for this problem."""


class NoIntersectionError(DomainError):
    """A weight ray does not meet the Pareto front inside the search bracket."""
