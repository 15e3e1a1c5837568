#!/usr/bin/env python3
"""
Tests for the equation of state and the energy pair.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from scipy.optimize import brentq

from eos import (
    ThermoParams,
    density_consistency_ratio,
    energy_density,
    energy_pair,
    energy_pair_limit,
    enthalpy,
    eulerian_state,
    hessian_min_eigenvalue,
    kappa,
    lorentz_factor,
    modified_density,
    number_density_from_energy_density,
    sound_speed_sq,
    thermo_point,
)
from errors import DomainError, InvalidInputError, SuperluminalError
from grid import GridSpec
from kinematics import compute_deformation, identity_state
from weight import make_weight


def test_params_validation():
    """Test rejected gas parameters."""
    for gamma, eps in ((1.0, 0.0), (3.5, 0.0), (2.0, -0.1), (float("nan"), 0.0)):
        with pytest.raises(InvalidInputError):
            ThermoParams(gamma, eps)
    params = ThermoParams(1.5, 0.2)
    assert params.alpha == pytest.approx(2.0)
    assert params.in_estimate_range
    assert not ThermoParams(2.0, 0.0).in_estimate_range


def test_newtonian_inversion_is_identity():
    """Test that rho = N when eps = 0."""
    rho = np.array([0.0, 0.5, 3.0])
    N = number_density_from_energy_density(rho, ThermoParams(2.0, 0.0))
    assert np.array_equal(N, rho)


def test_inversion_residual():
    """Test the N(rho) inversion accuracy over a wide range."""
    for params in (ThermoParams(2.0, 0.5), ThermoParams(1.4, 1.0), ThermoParams(3.0, 0.1)):
        rho = np.concatenate(([0.0], np.logspace(-8, 6, 60)))
        N = number_density_from_energy_density(rho, params)
        residual = np.abs(energy_density(N, params) - rho)
        assert np.all(residual <= 1e-12 * np.maximum(1.0, rho) + 1e-14)
        assert N[0] == 0.0
        assert np.all(N[1:] > 0.0)


def test_inversion_residual_on_arrays():
    """Test the residual bound for array input near hard-to-converge densities."""
    cases = ((ThermoParams(2.0, 0.5), 3.486), (ThermoParams(3.0, 0.1), 53.56))
    for params, centre in cases:
        rho = np.linspace(0.9 * centre, 1.1 * centre, 41)
        N = np.asarray(number_density_from_energy_density(rho, params))
        residual = np.abs(energy_density(N, params) - rho)
        assert np.all(residual <= 1e-12 * np.maximum(1.0, rho))
        scalar = number_density_from_energy_density(centre, params)
        assert N[20] == pytest.approx(scalar, rel=1e-12)


def test_inversion_matches_brentq():
    """Test the Newton inversion against a bracketed root finder."""
    params = ThermoParams(1.5, 0.7)
    for rho in (1e-3, 0.4, 2.0, 50.0, 1e3):
        expected = brentq(lambda n: n + params.eps2 * n ** params.gamma - rho, 0.0, rho,
                          xtol=1e-15, rtol=1e-14)
        assert number_density_from_energy_density(rho, params) == pytest.approx(expected, rel=1e-10)


def test_inversion_scalar_and_errors():
    """Test scalar output and the error paths."""
    params = ThermoParams(2.0, 0.5)
    N = number_density_from_energy_density(2.0, params)
    assert isinstance(N, float)
    assert N + 0.25 * N * N == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(DomainError):
        number_density_from_energy_density(-1.0, params)
    with pytest.raises(InvalidInputError):
        number_density_from_energy_density(float("inf"), params)


def test_sound_speed():
    """Test sound speed values, the light-speed bound and vacuum handling."""
    assert sound_speed_sq(1.0, ThermoParams(2.0, 0.0)) == pytest.approx(2.0)
    params = ThermoParams(2.0, 0.5)
    csq = sound_speed_sq(np.logspace(-3, 8, 30), params)
    assert np.all(csq < 1.0 / params.eps2)
    with pytest.raises(DomainError):
        sound_speed_sq(0.0, params)
    assert sound_speed_sq(np.array([0.0, 1.0]), params, allow_vacuum=True)[0] == 0.0


def test_thermo_point():
    """Test the bundled thermodynamic state."""
    params = ThermoParams(1.5, 0.3)
    point = thermo_point(0.7, params)
    assert point.p == pytest.approx(0.7 ** 1.5)
    assert point.h == pytest.approx(enthalpy(0.7, params))
    assert point.h == pytest.approx(3.0 * 0.7 ** 0.5)
    assert point.rho == pytest.approx(0.7 + 0.09 * 0.7 ** 1.5)


def test_lorentz_factor():
    """Test Gamma and the superluminal error."""
    params = ThermoParams(2.0, 0.5)
    assert lorentz_factor(np.array([1.0, 0.0, 0.0]), params) == pytest.approx(1.0 / np.sqrt(0.75))
    assert lorentz_factor(np.array([5.0, 0.0, 0.0]), ThermoParams(2.0, 0.0)) == 1.0
    field = np.zeros((3, 1, 1, 4))
    field[0, 0, 0, 2] = 2.0
    with pytest.raises(SuperluminalError) as info:
        lorentz_factor(field, params)
    assert info.value.node == (0, 0, 2)


def test_modified_density():
    """Test rho_tilde at rest and in the Newtonian case."""
    assert modified_density(2.0, np.array([0.3, 0.0, 0.0]), ThermoParams(2.0, 0.0)) == 2.0
    params = ThermoParams(2.0, 0.5)
    N = number_density_from_energy_density(2.0, params)
    assert modified_density(2.0, np.zeros(3), params) == pytest.approx(2.0 + 0.25 * N * N)


def test_kappa_newtonian():
    """Test kappa = 1/(gamma - 1) at eps = 0."""
    assert kappa(ThermoParams(2.0, 0.0)) == pytest.approx(1.0, rel=1e-8)
    assert kappa(ThermoParams(1.5, 0.0)) == pytest.approx(2.0, rel=1e-8)


def test_energy_pair_limit_values():
    """Test the Newtonian energy pair."""
    params = ThermoParams(2.0, 0.0)
    v = np.array([0.2, 0.0, 0.0])
    V, H = energy_pair(1.5, v, params)
    assert V == pytest.approx(0.5 * 1.5 * 0.04 + 1.5 ** 2)
    assert H[0] == pytest.approx(0.2 * (V + 1.5 ** 2))
    assert energy_pair_limit(1.5, v, params)[0] == V


def test_energy_pair_converges_to_limit():
    """Test that V tends to its Newtonian form as eps -> 0."""
    v = np.array([0.3, -0.1, 0.2])
    V0, H0 = energy_pair_limit(1.2, v, ThermoParams(2.0, 0.0))
    gaps = []
    for eps in (0.1, 0.05, 0.025):
        V, H = energy_pair(1.2, v, ThermoParams(2.0, eps))
        gaps.append(abs(V - V0))
        assert np.allclose(H, H0, rtol=0.1)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2 * V0


def test_energy_pair_vacuum():
    """Test that the energy pair is undefined at vacuum."""
    with pytest.raises(DomainError):
        energy_pair(0.0, np.zeros(3), ThermoParams(2.0, 0.3))


def test_density_consistency():
    """Test that the exp-integral density matches the EOS only at gamma = 2."""
    rho = np.linspace(0.1, 3.0, 12)
    ratio = np.asarray(density_consistency_ratio(rho, ThermoParams(2.0, 0.4)))
    assert np.ptp(ratio) <= 1e-8 * ratio.mean()
    other = np.asarray(density_consistency_ratio(rho, ThermoParams(1.5, 0.4)))
    assert np.ptp(other) > 1e-4


def test_energy_convexity():
    """Test that V is convex in the conserved variables at sample states."""
    v = np.array([0.1, 0.05, 0.0])
    assert hessian_min_eigenvalue(1.0, v, ThermoParams(2.0, 0.0)) > 0.0
    assert hessian_min_eigenvalue(1.0, v, ThermoParams(2.0, 0.1)) > 0.0


def test_eulerian_state_rest():
    """Test that the reconstruction gives N = w^alpha at rest."""
    grid = GridSpec.planar(17)
    params = ThermoParams(2.0, 0.3)
    state = identity_state(grid)
    weight = make_weight("parabolic", grid)
    fields = eulerian_state(state, compute_deformation(state, grid), weight, params)
    assert np.allclose(fields.N, weight.w)
    assert fields.csq[..., 0] == 0.0
    assert np.all(fields.rho >= fields.N)


if __name__ == "__main__":
    test_params_validation()
    test_newtonian_inversion_is_identity()
    test_inversion_residual()
    test_inversion_residual_on_arrays()
    test_inversion_matches_brentq()
    test_inversion_scalar_and_errors()
    test_sound_speed()
    test_thermo_point()
    test_lorentz_factor()
    test_modified_density()
    test_kappa_newtonian()
    test_energy_pair_limit_values()
    test_energy_pair_converges_to_limit()
    test_energy_pair_vacuum()
    test_density_consistency()
    test_energy_convexity()
    test_eulerian_state_rest()
    print("All tests passed!")
