"""Exception hierarchy; the CLI maps each family to a stable exit code."""


class ConfigError(ValueError):
    """Invalid run configuration or argument (exit code 2)."""


class DataValidationError(ValueError):
    """Input data violates a documented format or invariant (exit code 3)."""


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed its own accuracy checks (exit code 4)."""


class QuadratureError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    """A result violates an identity that holds exactly (convention bug upstream)."""
