#!/usr/bin/env python3
"""
Second-order Lagrangian system for the flow map.

    w^a B^j_i d_t^2 eta^i + w^(1+a) C^k_ij d_k d_t eta^i
        + d_k (w^(1+a) A^k_j J^(-1/a)) = 0                      (a = alpha)

    B^j_i = ((1 + e^2 h) d^j_i + (1 + (1 - 1/a) e^2 h) e^2 G^2 v^i v^j) G^(2+1/a)
    C^k_ij = -(1 + 1/a) e^2 G^2 J^(-1/a) (A^k_i v^j + A^k_j v^i)
    h = (1 + a) w (G J)^(-1/a),   chi = (1 + e^2 h) G v

with v = d_t eta, G the Lorentz factor and e = eps. The equivalent
first-order form reads G d_t chi^j + A^k_j d_k h = 0.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from eos import ThermoParams, lorentz_factor
from errors import InvalidInputError
from grid import GridSpec
from kinematics import (
    DeformationData,
    FlowState,
    compute_deformation,
    lie_from_gradient,
    outer,
    uniform_step,
)
from weight import WeightField

logger = logging.getLogger(__name__)


@dataclass
class CoefficientData:
    """
    Nodewise coefficients of the second-order system.

    Attributes:
        B: Symmetric positive definite tensor field B[j, i] = B^j_i
        C: C[k, i, j] = C^k_ij, symmetric in (i, j)
        chi: Modified velocity (1 + eps^2 h) Gamma v
        h: Enthalpy (1 + alpha) w (Gamma J)^(-1/alpha)
        Gamma: Lorentz factor
    """

    B: np.ndarray
    C: np.ndarray
    chi: np.ndarray
    h: np.ndarray
    Gamma: np.ndarray


def assemble_coefficients(state: FlowState, defo: DeformationData, weight: WeightField,
                          params: ThermoParams) -> CoefficientData:
    """
    Assemble B, C, chi, h and Gamma.

    eps = 0 short-circuits to B = identity and C = 0 exactly.

    Raises:
        SuperluminalError: If eps |v| >= 1 at some node (index attached)
    """
    v = state.eta_t
    alpha = params.alpha
    Gamma = np.asarray(lorentz_factor(v, params), dtype=float)
    h = (1.0 + alpha) * weight.w * np.exp(-np.log(Gamma * defo.J) / alpha)
    identity = np.array(np.broadcast_to(np.eye(3).reshape((3, 3) + (1,) * (v.ndim - 1)),
                                        (3, 3) + v.shape[1:]))

    if params.eps == 0.0:
        return CoefficientData(
            B=identity,
            C=np.zeros((3, 3, 3) + v.shape[1:]),
            chi=v.copy(),
            h=h,
            Gamma=Gamma,
        )

    e2 = params.eps2
    e2h = e2 * h
    G2 = Gamma * Gamma
    B = ((1.0 + e2h) * identity
         + (1.0 + (1.0 - 1.0 / alpha) * e2h) * e2 * G2 * outer(v, v)) * Gamma ** (2.0 + 1.0 / alpha)
    coef = -(1.0 + 1.0 / alpha) * e2 * G2 * defo.J_power(-1.0 / alpha)
    A = defo.A
    C = coef * (A[:, :, None] * v[None, None, :] + A[:, None, :] * v[None, :, None])
    return CoefficientData(B=B, C=C, chi=(1.0 + e2h) * Gamma * v, h=h, Gamma=Gamma)


def _c_term(coeffs: CoefficientData, Dv: np.ndarray) -> np.ndarray:
    """sum_{k,i} C^k_ij d_k v^i, with Dv[i, k] = d_k v^i."""
    return np.einsum("kij...,ik...->j...", coeffs.C, Dv)


def _apply(B: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("ji...,i...->j...", B, a)


def system_residual(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                    weight: WeightField, grid: GridSpec, params: ThermoParams) -> np.ndarray:
    """
    Pointwise residual of the second-order system.

    The pressure term d_k(w^(1+a) A^k_j J^(-1/a)) is differenced as a
    whole (conservative form).

    Raises:
        InvalidInputError: If the state carries no eta_tt
    """
    a = state.require_acceleration()
    alpha = params.alpha
    flux = weight.power(1.0 + alpha) * defo.A * defo.J_power(-1.0 / alpha)
    residual = weight.power(alpha) * _apply(coeffs.B, a)
    if params.eps > 0.0:
        Dv = grid.gradient(state.eta_t)
        residual = residual + weight.power(1.0 + alpha) * _c_term(coeffs, Dv)
    return residual + grid.divergence_rows(flux)


def pressure_flux_integral(defo: DeformationData, weight: WeightField, grid: GridSpec,
                           params: ThermoParams) -> np.ndarray:
    """Integral over Omega of d_k(w^(1+a) A^k_j J^(-1/a)), per component j."""
    flux = weight.power(1.0 + params.alpha) * defo.A * defo.J_power(-1.0 / params.alpha)
    return grid.integrate(grid.divergence_rows(flux))


def acceleration(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                 weight: WeightField, grid: GridSpec, params: ThermoParams,
                 forcing: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Solve the system for d_t^2 eta with w^alpha cancelled analytically.

        B a = -[w C^k_ij d_k v^i + (1+a) (d_k w) A^k_j J^(-1/a)
                + w d_k(A^k_j J^(-1/a))] + forcing

    No division by w occurs, so boundary nodes are regular.

    Args:
        forcing: Optional body force per unit w^alpha, vector field
    """
    alpha = params.alpha
    flux = defo.A * defo.J_power(-1.0 / alpha)
    w = weight.w
    rhs = -((1.0 + alpha) * np.einsum("k...,kj...->j...", weight.grad_w, flux)
            + w * grid.divergence_rows(flux))
    if params.eps > 0.0:
        rhs = rhs - w * _c_term(coeffs, grid.gradient(state.eta_t))
    if forcing is not None:
        rhs = rhs + forcing
    if params.eps == 0.0:
        return rhs

    B = np.moveaxis(coeffs.B, (0, 1), (-2, -1))
    b = np.moveaxis(rhs, 0, -1)[..., None]
    return np.moveaxis(np.linalg.solve(B, b)[..., 0], -1, 0)


def chi_time_derivative(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                        grid: GridSpec, params: ThermoParams) -> np.ndarray:
    """
    d_t chi expanded through d_t^2 eta:

        d_t chi^j = [(1 + e^2 h) d_ij + (1 + (1 - 1/a) e^2 h) e^2 G^2 v^i v^j] G a^i
                    - (1/a) e^2 h G v^j div_eta v
    """
    a = state.require_acceleration()
    if params.eps == 0.0:
        return a.copy()
    v = state.eta_t
    e2, alpha = params.eps2, params.alpha
    e2h = e2 * coeffs.h
    G = coeffs.Gamma
    va = np.sum(v * a, axis=0)
    div_v = lie_from_gradient(grid.gradient(v), defo.A).divergence
    return (G * ((1.0 + e2h) * a + (1.0 + (1.0 - 1.0 / alpha) * e2h) * e2 * G * G * va * v)
            - (e2h / alpha) * G * v * div_v)


def chi_h_residual(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                   grid: GridSpec, params: ThermoParams,
                   chi_t: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Gamma d_t chi^j + A^k_j d_k h at every node.

    Args:
        chi_t: d_t chi if known (e.g. from a path); otherwise expanded
            from eta_tt by chi_time_derivative
    """
    if chi_t is None:
        chi_t = chi_time_derivative(state, defo, coeffs, grid, params)
    Dh = grid.gradient(coeffs.h)
    return coeffs.Gamma * chi_t + np.einsum("kj...,k...->j...", defo.A, Dh)


def chi_h_residual_from_path(path: Sequence[FlowState], grid: GridSpec, weight: WeightField,
                             params: ThermoParams) -> List[np.ndarray]:
    """
    chi-h residual at the interior samples of a uniform path, with
    d_t chi by centered time differences.

    Raises:
        InvalidInputError: With fewer than 3 states or non-uniform sampling
    """
    if len(path) < 3:
        raise InvalidInputError(f"Path needs >= 3 states, got {len(path)}")
    dt = uniform_step([s.time for s in path])
    defos = [compute_deformation(s, grid) for s in path]
    coeffs = [assemble_coefficients(s, d, weight, params) for s, d in zip(path, defos)]
    out = []
    for k in range(1, len(path) - 1):
        chi_t = (coeffs[k + 1].chi - coeffs[k - 1].chi) / (2.0 * dt)
        out.append(chi_h_residual(path[k], defos[k], coeffs[k], grid, params, chi_t=chi_t))
    return out


def residual_factor(coeffs: CoefficientData, weight: WeightField, params: ThermoParams) -> np.ndarray:
    """
    w^alpha Gamma^(1/alpha), the nodewise factor with
    system_residual = factor * chi_h_residual up to discretisation.
    """
    return weight.power(params.alpha) * np.power(coeffs.Gamma, 1.0 / params.alpha)


def structure_identity_residual(defo: DeformationData, l: int, grid: GridSpec,
                                alpha: float, form: str = "divergence") -> np.ndarray:
    """
    Residual of the gradient-of-divergence identity

        d_l(A^k_i J^(-1/a)) = -(1 + 1/a) J^(-1/a) A^k_i div_eta d_l eta
                              + J^(-1/a) [A^k_i A^s_r - A^k_r A^s_i] d_l eta^r,_s

    with the left side differenced and the right side assembled. The
    "curl" form assembles the same right side as
    -J^(-1/a) [(1/a) A^k_i div_eta d_l eta + A^k_r ([D_eta d_l eta]^i_r
    + [Curl_eta d_l eta]^r_i)].

    Args:
        defo: Deformation of a smooth flow map
        l: Derivative direction 0, 1 or 2
        grid: The grid
        alpha: 1/(gamma - 1)
        form: "divergence" or "curl"

    Returns:
        Tensor field residual[k, i]
    """
    if l not in (0, 1, 2):
        raise InvalidInputError(f"Derivative direction must be 0, 1 or 2, got {l}")
    A = defo.A
    f = defo.J_power(-1.0 / alpha)
    lhs = grid.derivative(A * f, l)

    DM = grid.gradient(defo.D_eta[:, l])  # DM[r, s] = d_s d_l eta^r
    lie = lie_from_gradient(DM, A)
    div = lie.divergence
    if form == "divergence":
        contraction = np.einsum("kr...,si...,rs...->ki...", A, A, DM)
        rhs = (-(1.0 + 1.0 / alpha) * f * A * div
               + f * (A * np.einsum("sr...,rs...->...", A, DM) - contraction))
    elif form == "curl":
        G = lie.gradient
        split = np.swapaxes(G, 0, 1) + lie.Curl  # [D_eta]^i_r + [Curl_eta]^r_i, indexed [r, i]
        rhs = -f * ((1.0 / alpha) * A * div + np.einsum("kr...,ri...->ki...", A, split))
    else:
        raise InvalidInputError(f"Unknown structure identity form '{form}'")
    return lhs - rhs
