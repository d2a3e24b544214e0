"""The module contains utility functions for the package"""

import math
from typing import Any

from loopcutter.exceptions import LCInvalidArgumentError


def validate_count(value: Any, vmin: int = 0, vmax: int | None = None) -> None:
    """Ensure that a value is a valid count

    Args:
        value: The count to be validated
        vmin: The minimum valid value for `value`
        vmax: The maximum valid value for `value`, if defined

    Raises:
        TypeError: `value` is not int type
        LCInvalidArgumentError: `value` is not in [`vmin`, `vmax`]
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"expected an integer count, got {value!r}")
    if value < vmin:
        raise LCInvalidArgumentError(f"count {value} below minimum {vmin}")
    if vmax is not None and value > vmax:
        raise LCInvalidArgumentError(f"count {value} above maximum {vmax}")


def validate_amount(value: Any, name: str = "value", positive: bool = False) -> float:
    """Ensure that a value is a finite, non-negative real amount

    Args:
        value: A length, cost, power or time amount
        name: Used in the error message
        positive: If True, zero is rejected as well

    Returns:
        `value` converted to float

    Raises:
        TypeError: `value` is not a real number
        LCInvalidArgumentError: `value` is negative, zero when `positive` is
            set, or not finite
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    amount = float(value)
    if not math.isfinite(amount):
        raise LCInvalidArgumentError(f"{name} must be finite")
    if amount < 0 or (positive and amount == 0):
        raise LCInvalidArgumentError(f"{name} out of range: {amount}")
    return amount


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Returns the canonical key of an undirected edge

    Args:
        u: One endpoint
        v: The other endpoint

    Returns:
        The endpoints in sorted order
    """
    return (u, v) if u <= v else (v, u)


def relative_gap(value: float, reference: float) -> float:
    """Returns `value / reference - 1`, treating a zero reference gracefully"""
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return value / reference - 1.0
