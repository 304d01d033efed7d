"""Exception hierarchy shared by every module."""


class NttError(Exception):
    """Base class for all errors raised by dsntt."""


class DomainError(NttError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NoPrimeFound(DomainError):
    """No prime with the requested properties exists in the search range."""


class ContractError(NttError, ArithmeticError):
    """A precondition that guarantees a bound (e.g. p < qR for REDC) was violated."""


class ConfigError(NttError, ValueError):
    """An invalid pipeline or run configuration."""
