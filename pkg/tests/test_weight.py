#!/usr/bin/env python3
"""
Tests for the degenerate weight.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from errors import InvalidInputError, InvalidWeightError
from grid import GridSpec
from profiles import list_profiles
from weight import CUSTOM_PROFILE, WeightField, make_weight, weight_norms


def test_all_profiles_validate():
    """Test that every registered profile passes validation."""
    for grid in (GridSpec.planar(33), GridSpec((8, 1, 17))):
        for name in list_profiles():
            weight = make_weight(name, grid)
            lo, hi = weight.comparability
            assert 0.0 < lo <= hi


def test_parabolic_values():
    """Test samples, derivatives and comparability of x3 (1 - x3)."""
    grid = GridSpec.planar(11)
    weight = make_weight("parabolic", grid)
    x3 = grid.x3
    assert np.allclose(weight.w[0, 0], x3 * (1 - x3))
    assert np.allclose(weight.derivative((0, 0), 1)[0, 0], 1 - 2 * x3)
    assert np.all(weight.derivative((0, 0), 2) == -2.0)
    assert not np.any(weight.derivative((0, 0), 3))
    assert not np.any(weight.derivative((1, 0), 0))
    assert weight.is_tangentially_constant
    lo, hi = weight.comparability
    assert lo == pytest.approx(0.5, abs=0.06)
    assert hi == pytest.approx(1.0)


def test_grad_w_tilted():
    """Test the tangential derivative of a modulated weight."""
    grid = GridSpec((8, 1, 9))
    weight = make_weight("tilted", grid)
    assert not weight.is_tangentially_constant
    assert np.any(weight.grad_w[0] != 0.0)
    assert not np.any(weight.grad_w[1])


def test_invalid_weights():
    """Test the rejection of weights outside the distance-comparable class."""
    grid = GridSpec.planar(33)
    for expression in ("1 + x3", "x3", "-x3*(1 - x3)", "x3^2*(1 - x3)"):
        with pytest.raises(InvalidWeightError):
            make_weight(CUSTOM_PROFILE, grid, expression)


def test_make_weight_errors():
    """Test unknown profiles and missing expressions."""
    grid = GridSpec.planar(9)
    with pytest.raises(InvalidInputError):
        make_weight("nope", grid)
    with pytest.raises(InvalidInputError):
        make_weight(CUSTOM_PROFILE, grid)
    with pytest.raises(InvalidInputError):
        make_weight("parabolic")


def test_derivative_order_limit():
    """Test that derivatives beyond max_order are refused."""
    weight = WeightField("x3*(1 - x3)", GridSpec.planar(9), max_order=2)
    weight.derivative((0, 0), 2)
    with pytest.raises(InvalidInputError):
        weight.derivative((1, 0), 2)


def test_power_clips_at_zero():
    """Test w^p = 0 on the faces."""
    weight = make_weight("sine", GridSpec.planar(9))
    powered = weight.power(2.5)
    assert powered[..., 0] == 0.0
    assert np.all(np.isfinite(powered))


def test_weight_norms_parabolic():
    """Test F_0 and F_0^(I) against their exact integrals (alpha = 1)."""
    weight = make_weight("parabolic", GridSpec.planar(257))
    F, F_I = weight_norms(weight, 0, 1.0)
    assert F == pytest.approx(1.0 / 630.0, rel=1e-4)
    assert F_I == pytest.approx(1.0 / 210.0, rel=1e-4)
    with pytest.raises(InvalidInputError):
        weight_norms(weight, weight.max_order, 1.0)


def test_header():
    """Test the serializable description."""
    header = make_weight("sine", GridSpec.planar(9)).header()
    assert header["profile"] == "sine"
    assert "sin" in header["expression"]


if __name__ == "__main__":
    test_all_profiles_validate()
    test_parabolic_values()
    test_grad_w_tilted()
    test_invalid_weights()
    test_make_weight_errors()
    test_derivative_order_limit()
    test_power_clips_at_zero()
    test_weight_norms_parabolic()
    test_header()
    print("All tests passed!")
