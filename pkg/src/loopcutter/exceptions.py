"""This contains all custom exceptions used in the package"""

from __future__ import annotations
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from loopcutter.model import ValidationReport


class LCError(Exception):
    """Base class of every error the package raises on purpose."""


class LCInvalidArgumentError(LCError, ValueError):
    """This error should be raised when an argument is outside the domain an
    operation accepts, e.g. a negative loop length or an unknown node id."""


class LCNotATreeError(LCInvalidArgumentError):
    """This error should be raised when a tree layout is required but the input
    contains a cycle or is disconnected."""


class LCValidationError(LCError):
    """This error should be raised when a dataset breaks the layout invariants.

    The full `ValidationReport` is kept so callers can list every violation.
    """

    def __init__(self, report: ValidationReport) -> None:
        super().__init__(
            "; ".join(f"{v.code}: {v.subject}" for v in report.violations)
        )
        self.report = report


class LCInfeasibleError(LCError):
    """This error should be raised when no design satisfies the loop-length,
    capacity or budget constraints. `customers` names the culprits when they
    can be identified."""

    def __init__(self, customers: Iterable[str] = (), reason: str = "") -> None:
        self.customers = tuple(customers)
        self.reason = reason
        message = reason or "no feasible design"
        if self.customers:
            message += ": " + ", ".join(self.customers)
        super().__init__(message)


class LCInvalidStateError(LCError, RuntimeError):
    """This error should be raised when an operation is called on an object that
    is not in a state where the operation makes sense."""


class LCLimitError(LCError):
    """This error should be raised when an exhaustive solver refuses an instance
    that is larger than its guard limits."""
