#!/usr/bin/env python3
"""
Tests for deformation tensors, the Piola identity and Lagrangian derivatives.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from errors import DegenerateMapError, InvalidInputError
from grid import GridSpec, frobenius_sq, refinement_order
from kinematics import (
    FlowState,
    adjugate3,
    compute_deformation,
    det3,
    identity_state,
    lie_gradient,
    matmul,
    piola_residual,
    verify_rate_identities,
)
from verification import (
    coupled_map_3d,
    curl_of_gradient_errors,
    piola_errors,
    rate_identity_path,
)


def _static(eta):
    return FlowState(eta=eta, eta_t=np.zeros_like(eta))


def test_det_and_adjugate_match_numpy():
    """Test nodewise 3x3 algebra against numpy.linalg."""
    rng = np.random.default_rng(3)
    M = rng.standard_normal((3, 3, 5))
    expected = np.linalg.det(np.moveaxis(M, -1, 0))
    assert np.allclose(det3(M), expected)
    product = matmul(M, adjugate3(M))
    assert np.allclose(product, det3(M) * np.eye(3)[:, :, None])


def test_identity_deformation():
    """Test D_eta = A = I and J = 1 for the identity map."""
    grid = GridSpec((4, 4, 9))
    defo = compute_deformation(identity_state(grid), grid)
    assert np.array_equal(defo.A, grid.identity_tensor())
    assert np.all(defo.J == 1.0)
    assert not np.any(piola_residual(defo, grid))


def test_inverse_and_cofactor():
    """Test A D_eta = I and cof = J A on the coupled map."""
    grid = GridSpec((8, 8, 9))
    defo = compute_deformation(_static(coupled_map_3d(grid)), grid)
    assert np.allclose(matmul(defo.A, defo.D_eta), grid.identity_tensor(), atol=1e-12)
    assert np.allclose(defo.cof, defo.J * defo.A)
    assert np.all(defo.J > 0.0)


def test_degenerate_map_names_node():
    """Test that a folded map raises DegenerateMapError with a node."""
    grid = GridSpec.planar(9)
    eta = grid.identity_map()
    eta[2] = -eta[2]
    with pytest.raises(DegenerateMapError) as info:
        compute_deformation(_static(eta), grid)
    assert info.value.node == (0, 0, 0)


def test_shape_mismatch():
    """Test that a state on another grid is rejected."""
    with pytest.raises(InvalidInputError):
        compute_deformation(identity_state(GridSpec.planar(9)), GridSpec.planar(11))


def test_flow_state_validation():
    """Test FlowState shape checks and the acceleration guard."""
    grid = GridSpec.planar(5)
    eta = grid.identity_map()
    with pytest.raises(InvalidInputError):
        FlowState(eta=eta, eta_t=np.zeros((3, 1, 1, 4)))
    state = FlowState(eta=eta, eta_t=np.zeros_like(eta))
    with pytest.raises(InvalidInputError):
        state.require_acceleration()
    assert state.with_acceleration(np.ones_like(eta)).eta_tt is not None
    rest = FlowState.at_rest(2.0 * eta, time=0.5)
    assert np.array_equal(rest.eta, 2.0 * eta)
    assert not rest.eta_t.any()
    assert not rest.require_acceleration().any()
    assert rest.time == 0.5


def test_piola_order():
    """Test second-order convergence of the Piola residual."""
    hs, errors = piola_errors((12, 24, 48))
    assert 1.7 <= refinement_order(hs, errors) <= 2.3


def test_curl_norm_identity():
    """Test |Curl F|^2 = 2 |curl F|^2 nodewise."""
    grid = GridSpec((6, 6, 9))
    defo = compute_deformation(_static(coupled_map_3d(grid)), grid)
    F = np.random.default_rng(5).standard_normal(grid.vector_shape)
    lie = lie_gradient(F, defo, grid)
    full = frobenius_sq(lie.Curl)
    assert np.all(np.abs(full - 2.0 * np.sum(lie.curl ** 2, axis=0)) <= 1e-12 * np.maximum(1.0, full))
    assert np.array_equal(lie.Curl, -np.swapaxes(lie.Curl, 0, 1))
    assert np.allclose(lie.divergence, np.trace(lie.gradient))


def test_curl_of_gradient_order():
    """Test that the curl of a Lagrangian gradient converges to zero."""
    hs, errors = curl_of_gradient_errors((32, 64, 128, 256))
    assert refinement_order(hs, errors) >= 1.7


def test_lie_gradient_of_flow_map():
    """Test D_eta eta = I."""
    grid = GridSpec((8, 8, 9))
    state = _static(coupled_map_3d(grid))
    defo = compute_deformation(state, grid)
    lie = lie_gradient(state.eta, defo, grid, flow_map=True)
    assert np.allclose(lie.gradient, grid.identity_tensor(), atol=1e-12)
    assert np.allclose(lie.Curl, 0.0, atol=1e-12)


def test_rate_identities_converge():
    """Test the d_t A and d_t J identities under time-step halving."""
    grid = GridSpec.planar(17)
    coarse = verify_rate_identities(rate_identity_path(grid, 0.02), grid)
    fine = verify_rate_identities(rate_identity_path(grid, 0.01), grid)
    assert coarse.samples == 3
    assert fine.max_A_residual < coarse.max_A_residual / 3.0
    assert fine.max_J_residual < coarse.max_J_residual / 3.0


def test_rate_identities_need_uniform_path():
    """Test the path requirements."""
    grid = GridSpec.planar(9)
    path = rate_identity_path(grid, 0.01)
    with pytest.raises(InvalidInputError):
        verify_rate_identities(path[:2], grid)
    path[2] = FlowState(eta=path[2].eta, eta_t=path[2].eta_t, time=path[2].time + 0.003)
    with pytest.raises(InvalidInputError):
        verify_rate_identities(path, grid)


if __name__ == "__main__":
    test_det_and_adjugate_match_numpy()
    test_identity_deformation()
    test_inverse_and_cofactor()
    test_degenerate_map_names_node()
    test_shape_mismatch()
    test_flow_state_validation()
    test_piola_order()
    test_curl_norm_identity()
    test_curl_of_gradient_order()
    test_lie_gradient_of_flow_map()
    test_rate_identities_converge()
    test_rate_identities_need_uniform_path()
    print("All tests passed!")
