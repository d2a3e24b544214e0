# pylint: disable=missing-module-docstring
# pylint: disable=missing-class-docstring
# pylint: disable=missing-function-docstring

import math
import pytest
from loopcutter.exceptions import LCInvalidArgumentError
from loopcutter.util import validate_count, validate_amount, edge_key, relative_gap


def test_validate_count():
    validate_count(1)
    validate_count(1, 0)
    validate_count(0, 0)
    with pytest.raises(LCInvalidArgumentError):
        validate_count(-1, 0)
    validate_count(5, 0, 5)
    with pytest.raises(LCInvalidArgumentError):
        validate_count(5, 0, 4)
    with pytest.raises(TypeError):
        validate_count("5")  # type: ignore
    with pytest.raises(TypeError):
        validate_count(True)


def test_validate_amount():
    assert validate_amount(3) == 3.0
    assert validate_amount(0.0) == 0.0
    with pytest.raises(LCInvalidArgumentError):
        validate_amount(0.0, positive=True)
    with pytest.raises(LCInvalidArgumentError):
        validate_amount(-1e-9)
    with pytest.raises(LCInvalidArgumentError):
        validate_amount(math.inf)
    with pytest.raises(LCInvalidArgumentError):
        validate_amount(math.nan)
    with pytest.raises(TypeError):
        validate_amount("1.5")  # type: ignore


def test_invalid_argument_is_a_value_error():
    with pytest.raises(ValueError):
        validate_amount(-1)


def test_edge_key():
    assert edge_key("b", "a") == ("a", "b")
    assert edge_key("a", "b") == ("a", "b")
    assert edge_key("x", "x") == ("x", "x")


def test_relative_gap():
    assert relative_gap(101.5, 100.0) == pytest.approx(0.015)
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(1.0, 0.0) == math.inf
