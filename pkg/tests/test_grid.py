#!/usr/bin/env python3
"""
Tests for the slab grid, its stencils and quadrature.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from errors import InvalidInputError
from grid import GridSpec, pairwise_orders, refinement_order


def test_grid_validation():
    """Test rejected grid shapes."""
    for shape in ((1, 1, 2), (0, 1, 9), (1, 1), (1.5, 1, 9)):
        with pytest.raises(InvalidInputError):
            GridSpec(shape)


def test_spacing_and_shapes():
    """Test node spacing and field shapes."""
    grid = GridSpec((4, 2, 11))
    assert grid.spacing == (0.25, 0.5, 0.1)
    assert grid.vector_shape == (3, 4, 2, 11)
    assert grid.tensor_shape == (3, 3, 4, 2, 11)
    assert not grid.is_planar
    assert GridSpec.planar(9).is_planar


def test_identity_map_gradient():
    """Test that the identity map has the identity deformation gradient."""
    grid = GridSpec((4, 4, 9))
    M = grid.flow_gradient(grid.identity_map())
    assert np.array_equal(M, grid.identity_tensor())


def test_derivative_exact_on_quadratics():
    """Test that the x3 stencil is exact for quadratics, faces included."""
    grid = GridSpec.planar(11)
    X3 = grid.coordinates()[2]
    d = grid.derivative(X3 ** 2, 2)
    assert np.allclose(d, 2.0 * X3, atol=1e-12)


def test_periodic_derivative_order():
    """Test second-order convergence of the periodic stencil."""
    hs, errors = [], []
    for n in (16, 32, 64):
        grid = GridSpec((n, 1, 3))
        X1 = grid.coordinates()[0]
        d = grid.derivative(np.sin(2 * math.pi * X1), 0)
        errors.append(float(np.max(np.abs(d - 2 * math.pi * np.cos(2 * math.pi * X1)))))
        hs.append(grid.spacing[0])
    assert refinement_order(hs, errors) == pytest.approx(2.0, abs=0.1)


def test_single_node_axis_is_zero():
    """Test that derivatives along a single node vanish."""
    grid = GridSpec.planar(9)
    f = np.random.default_rng(0).standard_normal(grid.scalar_shape)
    assert not np.any(grid.derivative(f, 0))
    assert not np.any(grid.mixed_derivative(f, (1, 0), 0))


def test_check_order():
    """Test the stencil-width guard and its message."""
    grid = GridSpec.planar(9)
    grid.check_order((0, 0), 4)
    grid.check_order((5, 0), 0)
    with pytest.raises(InvalidInputError) as info:
        grid.check_order((0, 0), 5)
    assert "n=5" in str(info.value)


def test_mixed_derivative_of_map():
    """Test that the identity part is differentiated exactly."""
    grid = GridSpec.planar(9)
    eta = grid.identity_map()
    first = grid.mixed_derivative_of_map(eta, (0, 0), 1)
    assert np.array_equal(first[2], np.ones(grid.scalar_shape))
    assert not np.any(first[:2])
    assert not np.any(grid.mixed_derivative_of_map(eta, (0, 0), 2))


def test_multi_indices():
    """Test the enumeration of (m, n) with |m| + n <= N."""
    grid = GridSpec((4, 4, 9))
    indices = grid.multi_indices(2)
    assert len(indices) == 10
    assert indices[0] == ((0, 0), 0)
    assert len(set(indices)) == len(indices)
    assert all(m[0] + m[1] + n <= 2 for m, n in indices)


def test_integrate_rules():
    """Test quadrature of a polynomial in x3."""
    grid = GridSpec((3, 1, 65))
    X3 = grid.coordinates()[2]
    f = X3 ** 2 * (1 - X3) ** 2
    assert float(grid.integrate(f, "simpson")) == pytest.approx(1.0 / 30.0, abs=1e-7)
    assert float(grid.integrate(f)) == pytest.approx(1.0 / 30.0, abs=1e-5)
    with pytest.raises(InvalidInputError):
        grid.integrate(f, "gauss")


def test_refine():
    """Test grid refinement keeps planar axes."""
    assert GridSpec.planar(9).refine().shape == (1, 1, 17)
    assert GridSpec((4, 2, 5)).refine(2).shape == (8, 4, 9)


def test_refinement_order_helpers():
    """Test the order fits on exact power laws."""
    h = [0.1, 0.05, 0.025]
    errors = [3.0 * x ** 2 for x in h]
    assert refinement_order(h, errors) == pytest.approx(2.0)
    assert pairwise_orders(h, errors) == pytest.approx([2.0, 2.0])
    with pytest.raises(InvalidInputError):
        refinement_order([0.1], [1.0])
    with pytest.raises(InvalidInputError):
        refinement_order(h, [1.0, 0.0, 1.0])


if __name__ == "__main__":
    test_grid_validation()
    test_spacing_and_shapes()
    test_identity_map_gradient()
    test_derivative_exact_on_quadratics()
    test_periodic_derivative_order()
    test_single_node_axis_is_zero()
    test_check_order()
    test_mixed_derivative_of_map()
    test_multi_indices()
    test_integrate_rules()
    test_refine()
    test_refinement_order_helpers()
    print("All tests passed!")
