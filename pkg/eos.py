#!/usr/bin/env python3
"""
Equation of state and relativistic kinematic factors.

Power-law gas normalised so that

    p = N^gamma,  rho = N + eps^2 N^gamma,  h = (1 + alpha) N^(1/alpha),

with alpha = 1/(gamma - 1). rho is the energy density, N the particle
number density. eps is the inverse light speed; eps = 0 is the
Newtonian branch. Every function accepts scalars or numpy arrays.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import integrate

from config import (
    DEFAULT_EPS,
    DEFAULT_GAMMA,
    NEWTON_MAX_ITER,
    NEWTON_TOL,
    QUAD_HEAD,
    QUAD_RTOL,
)
from errors import DomainError, InvalidInputError, SuperluminalError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ThermoParams:
    """
    Gas parameters.

    Attributes:
        gamma: Adiabatic exponent, accepted in (1, 3]
        eps: Inverse light speed, eps >= 0
    """

    gamma: float = DEFAULT_GAMMA
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.eps)):
            raise InvalidInputError(f"Non-finite gas parameters: gamma={self.gamma}, eps={self.eps}")
        if not 1.0 < self.gamma <= 3.0:
            raise InvalidInputError(f"gamma must lie in (1, 3], got {self.gamma}")
        if self.eps < 0.0:
            raise InvalidInputError(f"eps must be nonnegative, got {self.eps}")
        if not self.in_estimate_range:
            logger.info("gamma = %g lies outside (1, 2); estimates are not covered there", self.gamma)

    @property
    def alpha(self) -> float:
        """alpha = 1/(gamma - 1)."""
        return 1.0 / (self.gamma - 1.0)

    @property
    def eps2(self) -> float:
        return self.eps * self.eps

    @property
    def relativistic(self) -> bool:
        return self.eps > 0.0

    @property
    def in_estimate_range(self) -> bool:
        """Whether gamma lies in the open interval (1, 2)."""
        return 1.0 < self.gamma < 2.0

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "eps": self.eps, "alpha": self.alpha}


@dataclass(frozen=True)
class ThermoPoint:
    """Thermodynamic state at one number density."""

    N: float
    rho: float
    p: float
    h: float
    csq: float


def _output(value: np.ndarray, like) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(value)
    return value


def pressure(N: ArrayLike, params: ThermoParams) -> ArrayLike:
    """p = N^gamma."""
    return np.power(N, params.gamma)


def energy_density(N: ArrayLike, params: ThermoParams) -> ArrayLike:
    """rho = N + eps^2 N^gamma."""
    return N + params.eps2 * np.power(N, params.gamma)


def enthalpy(N: ArrayLike, params: ThermoParams) -> ArrayLike:
    """h = gamma/(gamma - 1) N^(gamma - 1) = (1 + alpha) N^(1/alpha)."""
    return (1.0 + params.alpha) * np.power(N, params.gamma - 1.0)


def number_density_from_energy_density(rho: ArrayLike, params: ThermoParams) -> ArrayLike:
    """
    Invert rho = N + eps^2 N^gamma for N.

    Newton iteration started from the upper bound min(rho, (rho/eps^2)^(1/gamma))
    and safeguarded by bisection on the running bracket. The map is
    increasing and convex, so the iteration converges monotonically.
    Iteration stops on the residual and ends with one polishing step.

    Args:
        rho: Energy density, rho >= 0
        params: Gas parameters

    Returns:
        N with |N + eps^2 N^gamma - rho| <= 1e-12 max(1, rho); N = 0 iff rho = 0

    Raises:
        InvalidInputError: If rho is not finite
        DomainError: If rho < 0
    """
    r = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(r)):
        raise InvalidInputError("Non-finite energy density")
    if np.any(r < 0.0):
        raise DomainError(f"Negative energy density: min rho = {r.min()}")
    if params.eps == 0.0:
        return _output(r.copy(), rho)

    e2, gamma = params.eps2, params.gamma
    scale = np.maximum(1.0, r)
    hi = np.minimum(r, np.power(r / e2, 1.0 / gamma))
    lo = np.zeros_like(r)
    N = hi.copy()
    for _ in range(NEWTON_MAX_ITER):
        f = N + e2 * np.power(N, gamma) - r
        done = np.abs(f) <= NEWTON_TOL * scale
        if np.all(done):
            break
        lo = np.where(f < 0.0, N, lo)
        hi = np.where(f > 0.0, N, hi)
        df = 1.0 + e2 * gamma * np.power(N, gamma - 1.0)
        trial = N - f / df
        outside = (trial <= lo) | (trial >= hi)
        trial = np.where(outside, 0.5 * (lo + hi), trial)
        N = np.where(done, N, trial)
    else:
        logger.warning("N(rho) inversion reached %d iterations", NEWTON_MAX_ITER)

    # One Newton polish, kept only where it lowers the residual
    f = N + e2 * np.power(N, gamma) - r
    df = 1.0 + e2 * gamma * np.power(N, gamma - 1.0)
    polished = np.maximum(N - f / df, 0.0)
    f_polished = polished + e2 * np.power(polished, gamma) - r
    N = np.where(np.abs(f_polished) < np.abs(f), polished, N)
    return _output(N, rho)


def sound_speed_sq(N: ArrayLike, params: ThermoParams, allow_vacuum: bool = False) -> ArrayLike:
    """
    Squared sound speed dp/drho.

    csq = gamma N^(gamma-1) / (1 + eps^2 gamma N^(gamma-1)), below 1/eps^2.

    Args:
        N: Number density, N > 0
        params: Gas parameters
        allow_vacuum: Return 0 at N = 0 nodes instead of raising

    Raises:
        DomainError: If N <= 0 (sound speed undefined at vacuum)
    """
    n = np.asarray(N, dtype=float)
    if allow_vacuum:
        if np.any(n < 0.0):
            raise DomainError("Negative number density")
    elif np.any(n <= 0.0):
        raise DomainError("Sound speed undefined at vacuum (N <= 0)")
    q = params.gamma * np.power(n, params.gamma - 1.0)
    return _output(q / (1.0 + params.eps2 * q), N)


def thermo_point(N: float, params: ThermoParams) -> ThermoPoint:
    """Bundle p, rho, h and csq at one number density N > 0."""
    return ThermoPoint(
        N=float(N),
        rho=float(energy_density(N, params)),
        p=float(pressure(N, params)),
        h=float(enthalpy(N, params)),
        csq=float(sound_speed_sq(N, params)),
    )


def speed_sq(v: np.ndarray) -> np.ndarray:
    """|v|^2 over the leading component axis."""
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=0)


def lorentz_factor(v: np.ndarray, params: ThermoParams) -> ArrayLike:
    """
    Gamma = (1 - eps^2 |v|^2)^(-1/2).

    Args:
        v: Velocity of shape (3,) or a vector field (3, ...)
        params: Gas parameters

    Returns:
        Gamma (float for a single vector, array for a field)

    Raises:
        SuperluminalError: If eps |v| >= 1 anywhere; carries the node index
    """
    q = speed_sq(v)
    if params.eps == 0.0:
        return _output(np.ones_like(q), q)
    beta2 = params.eps2 * q
    bad = beta2 >= 1.0
    if np.any(bad):
        node = tuple(int(i) for i in np.argwhere(bad)[0]) if q.ndim else None
        value = float(np.sqrt(np.max(beta2)))
        raise SuperluminalError(f"Superluminal velocity: eps|v| = {value:.6g} at node {node}",
                                node=node, value=value)
    return _output(1.0 / np.sqrt(1.0 - beta2), q)


def modified_density(rho: float, v: np.ndarray, params: ThermoParams) -> float:
    """
    rho_tilde = (rho + eps^2 p(rho)) / (1 - eps^2 |v|^2).

    Raises:
        DomainError: If rho < 0
        SuperluminalError: As lorentz_factor
    """
    if rho < 0.0:
        raise DomainError(f"Negative energy density: {rho}")
    gamma_factor = lorentz_factor(v, params)
    if params.eps == 0.0:
        return float(rho)
    p = pressure(number_density_from_energy_density(rho, params), params)
    return float((rho + params.eps2 * p) * gamma_factor**2)


def _pressure_of_energy_density(s: ArrayLike, params: ThermoParams) -> ArrayLike:
    return pressure(number_density_from_energy_density(s, params), params)


@functools.lru_cache(maxsize=64)
def kappa(params: ThermoParams) -> float:
    """
    kappa = int_0^1 p(s)/s^2 ds.

    The integrand behaves like s^(gamma-2) near 0; [0, QUAD_HEAD] is
    integrated from the power-law head, the rest adaptively.
    """
    head = QUAD_HEAD ** (params.gamma - 1.0) / (params.gamma - 1.0)
    tail, _ = integrate.quad(
        lambda s: _pressure_of_energy_density(s, params) / (s * s),
        QUAD_HEAD, 1.0, epsabs=0.0, epsrel=QUAD_RTOL, limit=200,
    )
    return head + tail


def _log_defect(rho: ArrayLike, params: ThermoParams) -> ArrayLike:
    """
    I(rho) = int_1^rho p(s) / (s (s + eps^2 p(s))) ds.

    Then exp(int_1^rho ds/(s + eps^2 p(s))) = rho exp(-eps^2 I(rho)).
    """
    e2 = params.eps2

    def integrand(s):
        p = _pressure_of_energy_density(s, params)
        return p / (s * (s + e2 * p))

    r = np.asarray(rho, dtype=float)
    if r.ndim == 0:
        value, _ = integrate.quad(integrand, 1.0, float(r), epsabs=0.0,
                                  epsrel=QUAD_RTOL, limit=200)
        return value

    # Map every node to tau in [0, 1]: s = 1 + tau (rho - 1)
    span = r - 1.0

    def mapped(tau):
        s = 1.0 + tau * span
        return span * integrand(s)

    value, _ = integrate.quad_vec(mapped, 0.0, 1.0, epsabs=1e-15, epsrel=QUAD_RTOL)
    return value


def exp_integral_density(rho: ArrayLike, params: ThermoParams) -> ArrayLike:
    """N(rho) = exp(int_1^rho ds/(s + eps^2 p(s))) of the energy pair."""
    return rho * np.exp(-params.eps2 * _log_defect(rho, params))


def density_consistency_ratio(rho: ArrayLike, params: ThermoParams) -> ArrayLike:
    """
    Ratio of the energy-pair N(rho) to the equation-of-state N(rho).

    The two satisfy the same linear ODE in rho only when gamma = 2, in
    which case the ratio is constant in rho.
    """
    return exp_integral_density(rho, params) / number_density_from_energy_density(rho, params)


def energy_pair_limit(rho: float, v: np.ndarray, params: ThermoParams) -> Tuple[float, np.ndarray]:
    """
    Newtonian energy pair.

    V = rho|v|^2/2 + rho int_0^rho p(s)/s^2 ds with p(s) = s^gamma, and
    H = v (V + p).
    """
    if rho <= 0.0:
        raise DomainError(f"Energy pair undefined at vacuum: rho = {rho}")
    v = np.asarray(v, dtype=float)
    p = rho**params.gamma
    V = 0.5 * rho * float(v @ v) + rho**params.gamma / (params.gamma - 1.0)
    return V, v * (V + p)


def energy_pair(rho: float, v: np.ndarray, params: ThermoParams) -> Tuple[float, np.ndarray]:
    """
    Relativistic energy pair (V, H) with d_t V + div H = 0.

    Evaluated in cancellation-free form, with Gamma the Lorentz factor,
    rho_tilde the modified density and I as in _log_defect:

        V = rho Gamma^3 |v|^2/(Gamma+1) + eps^2 p Gamma^2 |v|^2
            - rho Gamma expm1(-eps^2 I)/eps^2 + kappa (rho_tilde - eps^2 p)
        H = v [rho Gamma^3 |v|^2/(Gamma+1) + p Gamma^2
               - rho Gamma expm1(-eps^2 I)/eps^2 + kappa rho_tilde]

    For eps = 0 the Newtonian limit is returned.

    Args:
        rho: Energy density, rho > 0
        v: Velocity (3,)
        params: Gas parameters

    Returns:
        Tuple of (V, H)

    Raises:
        DomainError: If rho <= 0
        SuperluminalError: If eps |v| >= 1
    """
    if rho <= 0.0:
        raise DomainError(f"Energy pair undefined at vacuum: rho = {rho}")
    if params.eps == 0.0:
        return energy_pair_limit(rho, v, params)

    v = np.asarray(v, dtype=float)
    e2 = params.eps2
    G = lorentz_factor(v, params)
    q = float(v @ v)
    p = float(_pressure_of_energy_density(rho, params))
    rho_t = (rho + e2 * p) * G * G
    k = kappa(params)
    rest = -rho * G * math.expm1(-e2 * _log_defect(rho, params)) / e2
    kinetic = rho * G**3 * q / (G + 1.0)

    V = kinetic + e2 * p * G * G * q + rest + k * (rho_t - e2 * p)
    H = v * (kinetic + p * G * G + rest + k * rho_t)
    return V, H


def energy_density_field(rho: np.ndarray, v: np.ndarray, params: ThermoParams,
                         kappa_value: float = None) -> np.ndarray:
    """
    V of the energy pair at every node of a field.

    Vacuum nodes (rho = 0) carry V = 0, the limit of V as rho -> 0.

    Args:
        rho: Energy density array
        v: Velocity field (3,) + rho.shape
        params: Gas parameters, eps > 0
        kappa_value: Precomputed kappa(params)
    """
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    mask = rho > 0.0
    if not np.any(mask):
        return out
    e2 = params.eps2
    r = rho[mask]
    vv = np.asarray(v, dtype=float)[:, mask]
    q = speed_sq(vv)
    G = lorentz_factor(vv, params)
    p = _pressure_of_energy_density(r, params)
    k = kappa(params) if kappa_value is None else kappa_value
    rest = -r * G * np.expm1(-e2 * _log_defect(r, params)) / e2
    out[mask] = (r * G**3 * q / (G + 1.0) + e2 * p * G * G * q + rest
                 + k * ((r + e2 * p) * G * G - e2 * p))
    return out


def conserved_variables(rho: float, v: np.ndarray) -> np.ndarray:
    """omega = (rho, rho v)."""
    v = np.asarray(v, dtype=float)
    return np.concatenate(([rho], rho * v))


def energy_hessian(rho: float, v: np.ndarray, params: ThermoParams,
                   step: float = 1e-4) -> np.ndarray:
    """
    Central-difference Hessian of V in omega = (rho, rho v).

    Args:
        rho: Energy density, rho > 0
        v: Velocity (3,)
        params: Gas parameters
        step: Difference step relative to rho

    Returns:
        Symmetrised 4x4 Hessian
    """
    omega = conserved_variables(rho, v)
    h = step * max(1.0, rho)

    def V_of(w):
        return energy_pair(w[0], w[1:] / w[0], params)[0]

    hess = np.zeros((4, 4))
    basis = np.eye(4) * h
    for i in range(4):
        for j in range(i, 4):
            ei, ej = basis[i], basis[j]
            value = (V_of(omega + ei + ej) - V_of(omega + ei - ej)
                     - V_of(omega - ei + ej) + V_of(omega - ei - ej)) / (4.0 * h * h)
            hess[i, j] = hess[j, i] = value
    return hess


def hessian_min_eigenvalue(rho: float, v: np.ndarray, params: ThermoParams,
                           step: float = 1e-4) -> float:
    """Smallest eigenvalue of the energy Hessian (convexity check)."""
    return float(np.linalg.eigvalsh(energy_hessian(rho, v, params, step)).min())


@dataclass
class EulerianState:
    """Fluid variables carried by each particle."""

    position: np.ndarray
    velocity: np.ndarray
    N: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    rho_tilde: np.ndarray
    csq: np.ndarray


def eulerian_state(state, defo, weight, params: ThermoParams) -> EulerianState:
    """
    Reconstruct Eulerian fields at the particles eta(t, x).

    N follows from w^alpha = N Gamma J; the other variables from the
    equation of state. Vacuum nodes carry N = rho = p = csq = 0.
    """
    G = lorentz_factor(state.eta_t, params)
    N = np.power(weight.w, params.alpha) / (G * defo.J)
    rho = energy_density(N, params)
    p = pressure(N, params)
    return EulerianState(
        position=state.eta,
        velocity=state.eta_t,
        N=N,
        rho=rho,
        p=p,
        rho_tilde=(rho + params.eps2 * p) * G * G,
        csq=sound_speed_sq(N, params, allow_vacuum=True),
    )
