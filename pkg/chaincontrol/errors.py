"""
Exception hierarchy for chaincontrol.
"""

from typing import Optional


class ChainControlError(Exception):
    """Base class for all chaincontrol errors."""


class ChainModelError(ChainControlError, ValueError):
    """Invalid chain model: dimension mismatch, index out of range, non-finite field.

    Raised directly by the chain builders. When ChainSpec validation raises it,
    pydantic re-raises it as pydantic.ValidationError, so catch ValueError to
    handle both.
    """


class PreconditionError(ChainControlError, ValueError):
    """An operation's hypotheses are not met (e.g. theorem conditions for a proof trace)."""


class NumericError(ChainControlError, ArithmeticError):
    """A matrix failed validation or a linear-algebra routine failed."""


class OptimizationError(ChainControlError):
    """The simplex search hit a non-finite objective or broke its own invariants."""


class IdentityFailure(ChainControlError):
    """A proof-trace identity did not hold to the configured tolerance."""

    def __init__(self, name: str, residual: float):
        super().__init__(f"identity '{name}' failed with residual {residual:.3e}")
        self.name = name
        self.residual = residual


class SpecFileError(ChainControlError):
    """A spec or sequence file could not be parsed."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class DatasetError(ChainControlError):
    """The bundled Table 1 dataset is missing or corrupted."""
