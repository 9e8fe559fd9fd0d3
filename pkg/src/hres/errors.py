"""Exception hierarchy shared by all hres modules.

The CLI maps these onto exit codes: domain/precondition/configuration
problems exit 2, numerical failures exit 3.
"""


class HresError(Exception):
    """Base class for all package errors."""


class DomainError(HresError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PreconditionError(HresError, ValueError):
    """A documented precondition on the call is violated."""


class ConfigurationError(HresError, ValueError):
    """A user-supplied object (bump, chart atlas, registry...) is inconsistent."""


class NumericalError(HresError, RuntimeError):
    """Quadrature or least squares failed to reach the requested accuracy."""
