from typing import Any


class CopulaError(Exception):
    """Base class of every error raised by the toolkit."""

    default_code = "copula_error"

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or {}

    def get_codes(self) -> str:
        return self.default_code


class DomainError(CopulaError, ValueError):
    """An argument lies outside the domain of the operation."""

    default_code = "domain_error"


class RangeError(CopulaError, ValueError):
    """A Kendall's tau target is not attainable by the family."""

    default_code = "range_error"


class DimensionError(CopulaError, ValueError):
    """Shape or dimension requirements are violated."""

    default_code = "dimension_error"


class UnsupportedFamilyError(CopulaError, ValueError):
    default_code = "unsupported_family"


class ConfigError(CopulaError, ValueError):
    """An experiment config or a flag set failed schema validation."""

    default_code = "invalid_config"


class NumericalError(CopulaError, ArithmeticError):
    """A non-finite intermediate or an unresolved cancellation."""

    default_code = "numerical_error"


class ConvergenceError(CopulaError, RuntimeError):
    """A root finder, optimizer, sampler or quadrature did not converge."""

    default_code = "convergence_error"
