"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to:
2 usage/configuration, 3 numeric domain, 4 resource cap, 5 I/O.
"""


class IntersubError(Exception):
    exit_code = 3


class DomainError(IntersubError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DimensionError(IntersubError, ValueError):
    """Vector lengths or subspace dimensions do not fit together."""


class ValidationError(IntersubError, ValueError):
    """Input failed a structural check (probability vector, Hermiticity, ...)."""


class SingularityError(IntersubError, ArithmeticError):
    """Quantity undefined at this point (0/0, log 0, diverging constant)."""


class InsufficientDataError(IntersubError, ValueError):
    pass


class DegenerateVarianceError(IntersubError, ArithmeticError):
    pass


class UnsupportedConfigurationError(IntersubError, ValueError):
    pass


class ResourceError(IntersubError):
    exit_code = 4


class ConfigurationError(IntersubError):
    exit_code = 2


class OutputError(IntersubError, OSError):
    exit_code = 5
