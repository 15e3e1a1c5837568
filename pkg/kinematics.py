#!/usr/bin/env python3
"""
Deformation-tensor calculus on the slab grid.

For a flow map eta the deformation gradient D_eta[r, s] = d_s eta^r has
inverse A (A[k, i] = A^k_i), Jacobian J and cofactor J A. Lagrangian
derivatives of a field F are expressed through A:

    [D_eta F]^i_r = A^s_r F^i,_s        div_eta F = A^s_r F^r,_s
    [curl_eta F]^i = e_ijk A^s_j F^k,_s
    [Curl_eta F]^i_j = A^s_j F^i,_s - A^s_i F^j,_s
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from errors import DegenerateMapError, InvalidInputError
from grid import GridSpec

logger = logging.getLogger(__name__)


def matmul(S: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Nodewise matrix product of tensor fields."""
    return np.einsum("ij...,jk...->ik...", S, T)


def transpose(T: np.ndarray) -> np.ndarray:
    return np.swapaxes(T, 0, 1)


def trace(T: np.ndarray) -> np.ndarray:
    return T[0, 0] + T[1, 1] + T[2, 2]


def det3(M: np.ndarray) -> np.ndarray:
    """Nodewise determinant by cofactor expansion along the first row."""
    return (M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
            - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
            + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))


def adjugate3(M: np.ndarray) -> np.ndarray:
    """Nodewise adjugate, M adj(M) = det(M) I."""
    adj = np.empty_like(M)
    adj[0, 0] = M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
    adj[0, 1] = M[0, 2] * M[2, 1] - M[0, 1] * M[2, 2]
    adj[0, 2] = M[0, 1] * M[1, 2] - M[0, 2] * M[1, 1]
    adj[1, 0] = M[1, 2] * M[2, 0] - M[1, 0] * M[2, 2]
    adj[1, 1] = M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
    adj[1, 2] = M[0, 2] * M[1, 0] - M[0, 0] * M[1, 2]
    adj[2, 0] = M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]
    adj[2, 1] = M[0, 1] * M[2, 0] - M[0, 0] * M[2, 1]
    adj[2, 2] = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return adj


def outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(u v^T)[i, j] = u^i v^j nodewise."""
    return u[:, None] * v[None, :]


@dataclass
class FlowState:
    """
    Flow map and its time derivatives at one instant.

    Attributes:
        eta: Flow map, vector field
        eta_t: Velocity d_t eta, vector field
        eta_tt: Acceleration d_t^2 eta, optional vector field
        time: Time stamp
    """

    eta: np.ndarray
    eta_t: np.ndarray
    eta_tt: Optional[np.ndarray] = None
    time: float = 0.0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.eta_t = np.asarray(self.eta_t, dtype=float)
        if self.eta.ndim != 4 or self.eta.shape[0] != 3:
            raise InvalidInputError(f"eta must have shape (3, n1, n2, n3), got {self.eta.shape}")
        if self.eta_t.shape != self.eta.shape:
            raise InvalidInputError(f"eta_t shape {self.eta_t.shape} != eta shape {self.eta.shape}")
        if self.eta_tt is not None:
            self.eta_tt = np.asarray(self.eta_tt, dtype=float)
            if self.eta_tt.shape != self.eta.shape:
                raise InvalidInputError(f"eta_tt shape {self.eta_tt.shape} != eta shape {self.eta.shape}")

    @classmethod
    def at_rest(cls, eta: np.ndarray, time: float = 0.0) -> "FlowState":
        """State with the given map and zero velocity and acceleration."""
        eta = np.asarray(eta, dtype=float)
        return cls(eta=eta, eta_t=np.zeros_like(eta), eta_tt=np.zeros_like(eta), time=time)

    def with_acceleration(self, eta_tt: np.ndarray) -> "FlowState":
        return replace(self, eta_tt=eta_tt)

    def require_acceleration(self) -> np.ndarray:
        if self.eta_tt is None:
            raise InvalidInputError("State carries no eta_tt")
        return self.eta_tt

    def copy(self) -> "FlowState":
        return FlowState(
            eta=self.eta.copy(),
            eta_t=self.eta_t.copy(),
            eta_tt=None if self.eta_tt is None else self.eta_tt.copy(),
            time=self.time,
        )


def identity_state(grid: GridSpec, time: float = 0.0) -> FlowState:
    """eta = x at rest."""
    return FlowState.at_rest(grid.identity_map(), time)


@dataclass
class DeformationData:
    """
    Deformation gradient and derived tensors.

    Attributes:
        D_eta: D_eta[r, s] = d_s eta^r
        A: Inverse of D_eta, A[k, i] = A^k_i
        J: det(D_eta)
        cof: J A
    """

    D_eta: np.ndarray
    A: np.ndarray
    J: np.ndarray
    cof: np.ndarray

    def J_power(self, exponent: float) -> np.ndarray:
        """J^exponent through exp(exponent log J)."""
        return np.exp(exponent * np.log(self.J))


def deformation_from_gradient(M: np.ndarray) -> DeformationData:
    """
    Build DeformationData from a sampled deformation gradient.

    Raises:
        DegenerateMapError: If J <= 0 at any node, naming the first one
    """
    J = det3(M)
    bad = ~(J > 0.0)
    if np.any(bad):
        node = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DegenerateMapError(f"Flow map degenerate: J = {J[node]:.6g} at node {node}", node=node)
    adj = adjugate3(M)
    return DeformationData(D_eta=M, A=adj / J, J=J, cof=adj)


def compute_deformation(state: FlowState, grid: GridSpec) -> DeformationData:
    """
    Deformation tensors of a flow map.

    Centered second-order differences in the interior, one-sided second
    order at x3 in {0, 1}; A by analytic 3x3 inversion; cof = J A.

    Args:
        state: FlowState sampled on grid
        grid: The grid

    Returns:
        DeformationData

    Raises:
        InvalidInputError: If eta does not match the grid
        DegenerateMapError: If J <= 0 at any node
    """
    grid.check_field(state.eta, 1, "eta")
    return deformation_from_gradient(grid.flow_gradient(state.eta))


def piola_residual(defo: DeformationData, grid: GridSpec) -> np.ndarray:
    """d_k (J A^k_i), differencing the cofactor itself."""
    return grid.divergence_rows(defo.cof)


class LieGradient(NamedTuple):
    """Lagrangian derivatives of a vector field."""

    gradient: np.ndarray  # [D_eta F]^i_r
    divergence: np.ndarray
    curl: np.ndarray
    Curl: np.ndarray  # [Curl_eta F]^i_j, antisymmetric


def lie_from_gradient(DF: np.ndarray, A: np.ndarray) -> LieGradient:
    """Lagrangian derivatives from the coordinate gradient DF[i, s] = F^i,_s."""
    G = matmul(DF, A)
    curl = np.stack([G[2, 1] - G[1, 2], G[0, 2] - G[2, 0], G[1, 0] - G[0, 1]])
    return LieGradient(gradient=G, divergence=trace(G), curl=curl, Curl=G - transpose(G))


def lie_gradient(F: np.ndarray, defo: DeformationData, grid: GridSpec,
                 flow_map: bool = False) -> LieGradient:
    """
    D_eta F, div_eta F, curl_eta F and Curl_eta F.

    Args:
        F: Vector field on grid
        defo: Deformation of the current flow map
        grid: The grid
        flow_map: F is itself a flow map (identity part differenced exactly)

    Returns:
        LieGradient

    Raises:
        InvalidInputError: On shape mismatch
    """
    grid.check_field(F, 1, "F")
    grid.check_field(defo.A, 2, "A")
    DF = grid.flow_gradient(F) if flow_map else grid.gradient(F)
    return lie_from_gradient(DF, defo.A)


@dataclass
class RateIdentityReport:
    """Max-node residuals of the rate identities for A and J."""

    max_A_residual: float
    max_J_residual: float
    samples: int
    dt: float


def uniform_step(times: Sequence[float]) -> float:
    """
    Common spacing of a time sequence.

    Raises:
        InvalidInputError: If the spacing is not uniform or not positive
    """
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    dt = float(steps.mean())
    if dt <= 0.0 or np.any(np.abs(steps - dt) > 1e-9 * max(1.0, abs(dt))):
        raise InvalidInputError("Path is not uniformly sampled in time")
    return dt


def verify_rate_identities(path: Sequence[FlowState], grid: GridSpec) -> RateIdentityReport:
    """
    Check d_t A = -A (d_t D_eta) A and d_t J = J A^s_r d_t eta^r,_s.

    Time derivatives of A and J are centered differences along the path;
    the right-hand sides use the carried velocity eta_t.

    Args:
        path: At least 3 states with uniform time spacing
        grid: The grid

    Raises:
        InvalidInputError: With fewer than 3 states or non-uniform spacing
    """
    if len(path) < 3:
        raise InvalidInputError(f"Rate identities need >= 3 states, got {len(path)}")
    dt = uniform_step([s.time for s in path])
    defos = [compute_deformation(s, grid) for s in path]

    max_A = 0.0
    max_J = 0.0
    for k in range(1, len(path) - 1):
        A, J = defos[k].A, defos[k].J
        Dv = grid.gradient(path[k].eta_t)
        dA = (defos[k + 1].A - defos[k - 1].A) / (2.0 * dt)
        dJ = (defos[k + 1].J - defos[k - 1].J) / (2.0 * dt)
        max_A = max(max_A, float(np.max(np.abs(dA + matmul(matmul(A, Dv), A)))))
        max_J = max(max_J, float(np.max(np.abs(dJ - J * trace(matmul(A, Dv))))))
    logger.debug("rate identities: A %.3e, J %.3e over %d samples", max_A, max_J, len(path) - 2)
    return RateIdentityReport(max_A_residual=max_A, max_J_residual=max_J,
                              samples=len(path) - 2, dt=dt)
