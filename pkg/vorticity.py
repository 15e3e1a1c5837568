#!/usr/bin/env python3
"""
Relativistic curl structure of the Lagrangian flow.

With v = d_t eta, G = D_eta v and c = eps^2 Gamma^2:

    S = I + c v v^T,   U = S^-1 = I - c v v^T / (1 + c |v|^2)
    R[i, j] = c (a^j v^i - a^i v^j),       a = d_t^2 eta
    X[i, j] = [Curl_eta chi]^j_i / (Gamma (1 + eps^2 h))

and solutions satisfy U G^T - G U + U R U = U X U. Curl_eta chi itself is
carried in time by

    Curl_eta chi(t) = Curl_eta chi(0) + int [d_t, Curl_eta] chi ds
                      - int Gamma^-1 [Curl_eta, Gamma] d_t chi ds.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from dynamics import CoefficientData, assemble_coefficients, chi_time_derivative
from eos import ThermoParams, lorentz_factor, speed_sq
from errors import InvalidInputError
from grid import GridSpec
from kinematics import (
    DeformationData,
    FlowState,
    compute_deformation,
    lie_gradient,
    matmul,
    outer,
    transpose,
    uniform_step,
)
from weight import WeightField

logger = logging.getLogger(__name__)


def _antisym(T: np.ndarray) -> np.ndarray:
    return T - transpose(T)


@dataclass
class CurlStructure:
    """
    Nodewise matrices of the curl structure.

    Attributes:
        S: I + eps^2 Gamma^2 v v^T, symmetric positive definite
        U: Inverse of S (rank-one update form)
        R: Antisymmetric, built from eta_tt; None when eta_tt is absent
        X: Antisymmetric, built from the curl history; None when not requested
    """

    S: np.ndarray
    U: np.ndarray
    R: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None


def structure_matrices(v: np.ndarray, params: ThermoParams):
    """
    S and U for a velocity field (or a batch of vectors, leading axis 3).

    Returns:
        (S, U, Gamma)
    """
    v = np.asarray(v, dtype=float)
    Gamma = np.asarray(lorentz_factor(v, params), dtype=float)
    c = params.eps2 * Gamma * Gamma
    vv = outer(v, v)
    eye = np.eye(3).reshape((3, 3) + (1,) * (v.ndim - 1))
    S = eye + c * vv
    U = eye - (c / (1.0 + c * speed_sq(v))) * vv
    return S, U, Gamma


def lagrangian_curl_chi(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                        grid: GridSpec) -> np.ndarray:
    """Curl_eta chi."""
    return lie_gradient(coeffs.chi, defo, grid).Curl


class CurlTerms(NamedTuple):
    """Instantaneous integrands of the curl evolution."""

    curl_chi: np.ndarray
    time_commutator: np.ndarray  # [d_t, Curl_eta] chi
    gamma_commutator: np.ndarray  # Gamma^-1 [Curl_eta, Gamma] d_t chi
    curl_chi_t: np.ndarray  # Curl_eta d_t chi


def time_commutator(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                    grid: GridSpec) -> np.ndarray:
    """
    [d_t, Curl_eta] chi = d_t A^l_j chi^i,_l - d_t A^l_i chi^j,_l.

    d_t A comes from d_t A = -A (D d_t eta) A, never from time differences.
    """
    dA = -matmul(matmul(defo.A, grid.gradient(state.eta_t)), defo.A)
    return _antisym(matmul(grid.gradient(coeffs.chi), dA))


def gamma_commutator(defo: DeformationData, coeffs: CoefficientData, chi_t: np.ndarray,
                     grid: GridSpec) -> np.ndarray:
    """[Curl_eta, Gamma] psi = A^s_j (d_s Gamma) psi^i - A^s_i (d_s Gamma) psi^j."""
    q = np.einsum("sj...,s...->j...", defo.A, grid.gradient(coeffs.Gamma))
    return _antisym(outer(chi_t, q))


def curl_terms(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
               grid: GridSpec, params: ThermoParams) -> CurlTerms:
    """Curl_eta chi and the commutator integrands; needs eta_tt."""
    chi_t = chi_time_derivative(state, defo, coeffs, grid, params)
    return CurlTerms(
        curl_chi=lagrangian_curl_chi(state, defo, coeffs, grid),
        time_commutator=time_commutator(state, defo, coeffs, grid),
        gamma_commutator=gamma_commutator(defo, coeffs, chi_t, grid) / coeffs.Gamma,
        curl_chi_t=lie_gradient(chi_t, defo, grid).Curl,
    )


class CurlHistory:
    """
    Trapezoid accumulators of the two time integrals in the curl evolution.

    The accumulated curl is curl0 + int K1 ds - int K2 ds, with K1 the
    time commutator and K2 the Gamma commutator over Gamma.
    """

    def __init__(self):
        self._time = None
        self._curl0 = None
        self._int_k1 = None
        self._int_k2 = None
        self._last = None

    @property
    def started(self) -> bool:
        return self._time is not None

    @property
    def time(self) -> Optional[float]:
        return self._time

    def start(self, t0: float, curl0: np.ndarray, k1: np.ndarray, k2: np.ndarray) -> None:
        self._time = float(t0)
        self._curl0 = np.array(curl0, dtype=float)
        self._int_k1 = np.zeros_like(self._curl0)
        self._int_k2 = np.zeros_like(self._curl0)
        self._last = (np.array(k1, dtype=float), np.array(k2, dtype=float))

    def advance(self, t: float, k1: np.ndarray, k2: np.ndarray) -> None:
        """
        Add the trapezoid panel from the previous sample to time t.

        Raises:
            InvalidInputError: If the history was never started or t does not increase
        """
        if not self.started:
            raise InvalidInputError("Curl history advanced before start")
        dt = float(t) - self._time
        if not dt > 0.0:
            raise InvalidInputError(f"Curl history time must increase: {self._time} -> {t}")
        k1_prev, k2_prev = self._last
        self._int_k1 += 0.5 * dt * (k1_prev + k1)
        self._int_k2 += 0.5 * dt * (k2_prev + k2)
        self._time = float(t)
        self._last = (np.array(k1, dtype=float), np.array(k2, dtype=float))

    @property
    def curl(self) -> np.ndarray:
        """Accumulated Curl_eta chi at the current time."""
        if not self.started:
            raise InvalidInputError("Curl history has no samples")
        return self._curl0 + self._int_k1 - self._int_k2

    @classmethod
    def from_path(cls, path: Sequence[FlowState], grid: GridSpec, weight: WeightField,
                  params: ThermoParams) -> "CurlHistory":
        """Rebuild the accumulators from stored states (each with eta_tt)."""
        history = cls()
        for state in path:
            defo = compute_deformation(state, grid)
            coeffs = assemble_coefficients(state, defo, weight, params)
            terms = curl_terms(state, defo, coeffs, grid, params)
            if history.started:
                history.advance(state.time, terms.time_commutator, terms.gamma_commutator)
            else:
                history.start(state.time, terms.curl_chi, terms.time_commutator,
                              terms.gamma_commutator)
        return history


def assemble_curl_structure(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                            params: ThermoParams, history: Optional[CurlHistory] = None,
                            with_X: bool = True) -> CurlStructure:
    """
    Assemble S, U, R and X.

    Args:
        state: Flow state; R is built when eta_tt is present
        defo: Deformation of state
        coeffs: Coefficients of state (h, Gamma)
        params: Gas parameters
        history: Curl history at state.time, needed for X
        with_X: Whether X is requested

    Raises:
        InvalidInputError: If X is requested without a history
        SuperluminalError: If eps |v| >= 1
    """
    if with_X and (history is None or not history.started):
        raise InvalidInputError("Curl structure X needs a curl history")
    v = state.eta_t
    S, U, Gamma = structure_matrices(v, params)

    R = None
    if state.eta_tt is not None:
        R = _antisym(params.eps2 * Gamma * Gamma * outer(v, state.eta_tt))

    X = None
    if with_X:
        phi = Gamma * (1.0 + params.eps2 * coeffs.h)
        X = transpose(history.curl) / phi
    return CurlStructure(S=S, U=U, R=R, X=X)


def curl_residual(state: FlowState, defo: DeformationData, cs: CurlStructure,
                  grid: GridSpec) -> np.ndarray:
    """
    U G^T - G U + U R U - U X U with G = D_eta d_t eta.

    Every term is assembled as a difference of transposes, so the result is
    exactly antisymmetric.

    Raises:
        InvalidInputError: If eta_tt or X is missing
    """
    state.require_acceleration()
    if cs.R is None or cs.X is None:
        raise InvalidInputError("Curl residual needs R and X")
    G = lie_gradient(state.eta_t, defo, grid).gradient
    U = cs.U
    URU = matmul(matmul(U, cs.R), U)
    UXU = matmul(matmul(U, cs.X), U)
    return _antisym(matmul(U, transpose(G))) + 0.5 * (_antisym(URU) - _antisym(UXU))


@dataclass
class VorticityReport:
    """
    Defects of the integrated curl evolution along a path.

    Attributes:
        max_kinematic_defect: With Curl_eta d_t chi as second integrand; an
            identity for any path, so only quadrature error remains
        max_dynamic_defect: With the Gamma commutator; zero only for solutions
        max_curl: Largest |Curl_eta chi| seen
        samples: Number of states
        dt: Sampling step
    """

    max_kinematic_defect: float
    max_dynamic_defect: float
    max_curl: float
    samples: int
    dt: float


def vorticity_transport_check(path: Sequence[FlowState], grid: GridSpec, weight: WeightField,
                              params: ThermoParams) -> VorticityReport:
    """
    Compare Curl_eta chi(t) with its integrated evolution.

    Args:
        path: Uniformly sampled states, each carrying eta_tt
        grid: The grid
        weight: Weight of the flow
        params: Gas parameters

    Raises:
        InvalidInputError: With fewer than 2 states or non-uniform sampling
    """
    if len(path) < 2:
        raise InvalidInputError(f"Vorticity check needs >= 2 states, got {len(path)}")
    dt = uniform_step([s.time for s in path])

    kinematic = CurlHistory()
    dynamic = CurlHistory()
    max_kin = max_dyn = max_curl = 0.0
    for state in path:
        defo = compute_deformation(state, grid)
        coeffs = assemble_coefficients(state, defo, weight, params)
        terms = curl_terms(state, defo, coeffs, grid, params)
        if not dynamic.started:
            kinematic.start(state.time, terms.curl_chi, terms.time_commutator, -terms.curl_chi_t)
            dynamic.start(state.time, terms.curl_chi, terms.time_commutator, terms.gamma_commutator)
        else:
            kinematic.advance(state.time, terms.time_commutator, -terms.curl_chi_t)
            dynamic.advance(state.time, terms.time_commutator, terms.gamma_commutator)
        max_kin = max(max_kin, float(np.max(np.abs(terms.curl_chi - kinematic.curl))))
        max_dyn = max(max_dyn, float(np.max(np.abs(terms.curl_chi - dynamic.curl))))
        max_curl = max(max_curl, float(np.max(np.abs(terms.curl_chi))))

    logger.debug("vorticity transport: kinematic %.3e, dynamic %.3e, max curl %.3e",
                 max_kin, max_dyn, max_curl)
    return VorticityReport(max_kinematic_defect=max_kin, max_dynamic_defect=max_dyn,
                           max_curl=max_curl, samples=len(path), dt=dt)
