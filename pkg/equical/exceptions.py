"""
Exceptions raised by the equical package.
"""

from typing import Optional, Tuple


class EquicalError(Exception):
    """Base class for all equical errors."""


class DomainError(EquicalError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateError(DomainError):
    """A likelihood ratio would be infinite or undefined."""


class NoSignChangeError(DomainError):
    """A root bracket whose endpoints share the same sign."""


class ConfigurationError(EquicalError, ValueError):
    """Invalid environment or simulation configuration."""


class ConvergenceError(EquicalError, RuntimeError):
    """
    A numerical routine did not converge.

    Attributes:
        estimate (Optional[float]): Best available estimate (bracket midpoint or partial integral)
        bracket (Optional[Tuple[float, float]]): Last bracket, for root finding
    """

    def __init__(self, message: str, estimate: Optional[float] = None,
                 bracket: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.estimate = estimate
        self.bracket = bracket


class SpecValidationError(EquicalError, ValueError):
    """
    A design spec file failed to parse or validate.

    Attributes:
        line (Optional[int]): 1-based line of the offending content, when known
        key (Optional[str]): Offending key, when known
    """

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
