#!/usr/bin/env python3
"""
Tests for expression parsing and sampling.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
import sympy as sy

from errors import InvalidInputError
from expressions import field_function, parse_expression, parse_vector, sample, x3, t
from grid import GridSpec


def test_parse_power_and_functions():
    """Test ^ as power and the function vocabulary."""
    expr = parse_expression("x3^2 + sin(pi*x3)")
    assert sy.simplify(expr - (x3 ** 2 + sy.sin(sy.pi * x3))) == 0


def test_parse_numbers_and_sympy():
    """Test numeric and sympy inputs."""
    assert parse_expression(2) == 2
    assert parse_expression(x3 * 2) == 2 * x3


def test_time_symbol_gated():
    """Test that t is only accepted when allowed."""
    assert parse_expression("t*x3", allow_time=True) == t * x3
    with pytest.raises(InvalidInputError):
        parse_expression("t*x3")


def test_rejects_foreign_names():
    """Test that unknown names and characters are rejected."""
    for text in ("__import__('os')", "y + 1", "x3; 1", "", "x3 +"):
        with pytest.raises(InvalidInputError):
            parse_expression(text)


def test_parse_vector_length():
    """Test that vectors need three components."""
    with pytest.raises(InvalidInputError):
        parse_vector(["x1", "x2"])


def test_sample_broadcasts_constants():
    """Test that constant expressions fill the grid."""
    grid = GridSpec.planar(9)
    values = sample(parse_expression("3"), grid)
    assert values.shape == grid.scalar_shape
    assert np.all(values == 3.0)


def test_field_function_time():
    """Test the time-dependent sampler."""
    grid = GridSpec.planar(5)
    f = field_function(parse_vector(["0", "t", "t*x3"], allow_time=True), grid)
    values = f(2.0)
    assert values.shape == grid.vector_shape
    assert np.all(values[1] == 2.0)
    assert values[2][..., -1] == pytest.approx(2.0)


if __name__ == "__main__":
    test_parse_power_and_functions()
    test_parse_numbers_and_sympy()
    test_time_symbol_gated()
    test_rejects_foreign_names()
    test_parse_vector_length()
    test_sample_broadcasts_constants()
    test_field_function_time()
    print("All tests passed!")
