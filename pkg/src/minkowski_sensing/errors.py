from typing import Any, Dict, Optional


class MinkowskiSensingError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(MinkowskiSensingError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(MinkowskiSensingError, ValueError):
    """An argument lies outside the domain of the operation (e.g. rank 0 where rank >= 1 is required)."""


class NumericError(MinkowskiSensingError, ArithmeticError):
    """A numerical routine failed; `diagnostics` carries whatever the routine reported."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BudgetExceededError(MinkowskiSensingError, RuntimeError):
    """An enumeration would exceed its configured budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"Enumeration requires {required} branches, budget is {budget}")
        self.required = required
        self.budget = budget


class ConfigError(MinkowskiSensingError, ValueError):
    """An experiment configuration cannot be loaded or is inconsistent."""
