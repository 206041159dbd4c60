"""Exception hierarchy shared by all modules."""


class ChoquardError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(ChoquardError, ValueError):
    """Invalid grid, problem or run configuration."""


class DomainError(ChoquardError, ValueError):
    """A parameter lies outside the domain of a formula."""


class UsageError(ChoquardError, ValueError):
    """Arguments are individually valid but do not fit together."""


class NumericError(ChoquardError, ArithmeticError):
    """Non-finite values, overflow, or failed numerical quadrature."""


class FiberingError(NumericError):
    """No sign change of the fibering derivative was found."""


class StagnationError(NumericError):
    """The descent stopped making progress."""
