#!/usr/bin/env python3
"""
Weighted energy functionals and inequality diagnostics.

For each multi-index (m, n) with |m| + n <= N and d = d_tau^m d_3^n:

    E^(I)_mn   = int w^(a+n) d v . B d v
    E^(II)_mn  = int w^(a+n+1) J^(-1/a) |div_eta d eta|^2
    E^(III)_mn = int w^(a+n+1) [D_eta d eta]^j_r U^r_i [D_eta d eta]^j_i
    E^(IV)_mn  = int w^(a+n+1) |d Curl_eta chi|^2

with v = d_t eta and a = alpha. The energy of interest is
E_N = E_N^(I) + E_N^(III) + E_N^(IV).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from config import HARDY_POINTS, MAJORANT_EXPONENT, MAX_ORDER_3D, MAX_ORDER_PLANAR
from dynamics import CoefficientData
from eos import ThermoParams
from errors import InvalidInputError, UnsupportedExponentError
from grid import GridSpec, MultiIndex, frobenius_sq
from kinematics import DeformationData, FlowState, lie_from_gradient, trace
from vorticity import CurlStructure, lagrangian_curl_chi
from weight import WeightField

logger = logging.getLogger(__name__)

TERM_NAMES = ("I", "II", "III", "IV")


def default_diagnostic_order(alpha: float, planar: bool) -> int:
    """min(2 ceil(alpha) + 9, cap) with cap 8 in planar symmetry, 4 in 3D."""
    cap = MAX_ORDER_PLANAR if planar else MAX_ORDER_3D
    return min(2 * math.ceil(alpha) + 9, cap)


def estimate_order(alpha: float) -> int:
    """Smallest integer N >= 2 alpha + 9."""
    return math.ceil(2.0 * alpha + 9.0)


class TermValues(NamedTuple):
    """Energy contributions of one multi-index."""

    I: float
    II: float
    III: float
    IV: float


@dataclass
class EnergyReport:
    """
    Energy functionals at one time.

    Attributes:
        time: Time stamp of the state
        order: Diagnostic order N
        estimate_order: Order required by the a priori estimate
        terms: Per-(m, n) contributions, in multi-index order
        noise_floor: Per-(m, n) roundoff amplification of the stencils
    """

    time: float
    order: int
    estimate_order: int
    terms: Dict[MultiIndex, TermValues] = field(default_factory=dict)
    noise_floor: Dict[MultiIndex, float] = field(default_factory=dict)

    def total(self, name: str) -> float:
        """Ordered sum of one functional over all multi-indices."""
        if name not in TERM_NAMES:
            raise InvalidInputError(f"Unknown energy term '{name}'. Available: {', '.join(TERM_NAMES)}")
        out = 0.0
        for values in self.terms.values():
            out += getattr(values, name)
        return out

    @property
    def E_I(self) -> float:
        return self.total("I")

    @property
    def E_II(self) -> float:
        return self.total("II")

    @property
    def E_III(self) -> float:
        return self.total("III")

    @property
    def E_IV(self) -> float:
        return self.total("IV")

    @property
    def E_total(self) -> float:
        return self.E_I + self.E_III + self.E_IV

    def term(self, m: Tuple[int, int], n: int) -> TermValues:
        return self.terms[(tuple(m), n)]

    def summary(self) -> dict:
        return {"t": self.time, "E_I": self.E_I, "E_II": self.E_II, "E_III": self.E_III,
                "E_IV": self.E_IV, "E_total": self.E_total}


def _noise_floor(state: FlowState, grid: GridSpec, m: Tuple[int, int], n: int) -> float:
    scale = 1.0 + float(np.max(np.abs(state.eta - grid.identity_map())))
    scale = max(scale, float(np.max(np.abs(state.eta_t))))
    amplification = 1.0
    for h, order in zip(grid.spacing, (m[0], m[1], n)):
        amplification *= h ** (-order)
    return float(np.finfo(float).eps * scale * amplification)


def _map_gradient(eta: np.ndarray, grid: GridSpec, m: Tuple[int, int], n: int) -> np.ndarray:
    """D(d eta) in coordinates, identity part exact."""
    if m == (0, 0) and n == 0:
        return grid.flow_gradient(eta)
    return grid.gradient(grid.mixed_derivative_of_map(eta, m, n))


def _term_values(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                 U: np.ndarray, curl_chi: np.ndarray, weight: WeightField, grid: GridSpec,
                 alpha: float, m: Tuple[int, int], n: int) -> TermValues:
    dv = grid.mixed_derivative(state.eta_t, m, n)
    lie = lie_from_gradient(_map_gradient(state.eta, grid, m, n), defo.A)
    G = lie.gradient
    dcurl = grid.mixed_derivative(curl_chi, m, n)

    w_low = weight.power(alpha + n)
    w_high = weight.power(alpha + n + 1)
    quad_B = np.einsum("j...,ji...,i...->...", dv, coeffs.B, dv)
    quad_U = np.einsum("jr...,ri...,ji...->...", G, U, G)
    return TermValues(
        I=float(grid.integrate(w_low * quad_B)),
        II=float(grid.integrate(w_high * defo.J_power(-1.0 / alpha) * lie.divergence ** 2)),
        III=float(grid.integrate(w_high * quad_U)),
        IV=float(grid.integrate(w_high * frobenius_sq(dcurl))),
    )


def energy_functionals(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                       cs: CurlStructure, weight: WeightField, grid: GridSpec,
                       params: ThermoParams, order: Optional[int] = None,
                       curl_chi: Optional[np.ndarray] = None, workers: int = 1) -> EnergyReport:
    """
    Evaluate E^(I..IV) for every |m| + n <= order.

    Tangential derivatives on a single node are exact zeros, so those
    multi-indices are recorded as 0 without evaluation.

    Args:
        state: Flow state
        defo: Its deformation
        coeffs: Its coefficients (B)
        cs: Curl structure (U)
        weight: Weight field
        grid: The grid
        params: Gas parameters
        order: Diagnostic order N (default_diagnostic_order if None)
        curl_chi: Curl_eta chi; computed from the state if None
        workers: Threads for the per-(m, n) evaluation

    Returns:
        EnergyReport

    Raises:
        InvalidInputError: If some (m, n) is too high for the stencils
    """
    alpha = params.alpha
    if order is None:
        order = default_diagnostic_order(alpha, grid.is_planar)
    if order < 0:
        raise InvalidInputError(f"Diagnostic order must be >= 0, got {order}")
    if curl_chi is None:
        curl_chi = lagrangian_curl_chi(state, defo, coeffs, grid)

    indices = grid.multi_indices(order)
    active = [mn for mn in indices if not grid.is_tangential_zero(mn[0])]
    for m, n in active:
        grid.check_order(m, n)

    def evaluate(mn):
        m, n = mn
        return _term_values(state, defo, coeffs, cs.U, curl_chi, weight, grid, alpha, m, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, active))
    else:
        values = [evaluate(mn) for mn in active]
    computed = dict(zip(active, values))

    report = EnergyReport(time=state.time, order=order, estimate_order=estimate_order(alpha))
    for mn in indices:
        if mn in computed:
            report.terms[mn] = computed[mn]
            report.noise_floor[mn] = _noise_floor(state, grid, *mn)
        else:
            report.terms[mn] = TermValues(0.0, 0.0, 0.0, 0.0)
            report.noise_floor[mn] = 0.0
    return report


def divergence_bound(state: FlowState, defo: DeformationData, cs: CurlStructure,
                     weight: WeightField, grid: GridSpec, params: ThermoParams,
                     order: int) -> Tuple[float, float]:
    """
    E_N^(II) and its majorant 3 lambda_max(S) E_N^(III).

    (tr G)^2 <= 3 |G|^2 and U = S^-1 >= lambda_max(S)^-1 I with
    lambda_max(S) = Gamma^2. E^(II) also carries J^(-1/a), so the majorant
    is scaled by its maximum over the nodes, which is 1 for
    volume-preserving maps.

    Returns:
        (E_N^(II), 3 max(Gamma^2) max(J^(-1/a)) E_N^(III))
    """
    alpha = params.alpha
    lambda_max = float(np.max(trace(cs.S) - 2.0))  # tr S = 2 + Gamma^2
    J_factor = defo.J_power(-1.0 / alpha)
    E_II = 0.0
    E_III = 0.0
    for m, n in grid.multi_indices(order):
        if grid.is_tangential_zero(m):
            continue
        grid.check_order(m, n)
        G = lie_from_gradient(_map_gradient(state.eta, grid, m, n), defo.A).gradient
        w_high = weight.power(alpha + n + 1)
        E_II += float(grid.integrate(w_high * J_factor * trace(G) ** 2))
        E_III += float(grid.integrate(w_high * np.einsum("jr...,ri...,ji...->...", G, cs.U, G)))
    return E_II, 3.0 * lambda_max * float(np.max(J_factor)) * E_III


@dataclass
class AprioriTable:
    """
    Sup-norm table of the a priori bound.

    Attributes:
        eta: max |w^(q/2) d_tau^p d_3^q eta^r,_s| per ((p1, p2), q)
        eta_t: max |w^(q/2) d_tau^p d_3^q d_t eta| per ((p1, p2), q)
    """

    eta: Dict[MultiIndex, float]
    eta_t: Dict[MultiIndex, float]

    @property
    def maximum(self) -> float:
        values = list(self.eta.values()) + list(self.eta_t.values())
        return max(values) if values else 0.0


def apriori_monitor(state: FlowState, defo: DeformationData, weight: WeightField,
                    grid: GridSpec, order: int) -> AprioriTable:
    """
    Weighted sup norms for |p| + q <= floor(N/2) (eta) and floor(N/2) - 1 (eta_t).

    Raises:
        InvalidInputError: If a derivative is too high for the stencils
    """
    half = order // 2
    M = defo.D_eta
    displacement_gradient = M - grid.identity_tensor()

    eta_table = {}
    for p, q in grid.multi_indices(half):
        if grid.is_tangential_zero(p):
            eta_table[(p, q)] = 0.0
            continue
        dM = M if (p, q) == ((0, 0), 0) else grid.mixed_derivative(displacement_gradient, p, q)
        eta_table[(p, q)] = float(np.max(np.abs(weight.power(0.5 * q) * dM)))

    vel_table = {}
    if half >= 1:
        for p, q in grid.multi_indices(half - 1):
            if grid.is_tangential_zero(p):
                vel_table[(p, q)] = 0.0
                continue
            dv = grid.mixed_derivative(state.eta_t, p, q)
            vel_table[(p, q)] = float(np.max(np.abs(weight.power(0.5 * q) * dv)))
    return AprioriTable(eta=eta_table, eta_t=vel_table)


class HardyResult(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def _unit_interval_rule(n_points: int):
    nodes, weights = roots_legendre(n_points)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def hardy_check(g: Callable, dg: Callable, k: float, n_points: int = HARDY_POINTS) -> HardyResult:
    """
    One-dimensional Hardy inequality on (0, 1).

    k > 1:  lhs = int s^(k-2) g^2,          rhs = int s^k (g^2 + g'^2)
    k < 1:  lhs = int s^(k-2) (g - g(0))^2, rhs = int s^k g'^2

    Args:
        g: Function of s, vectorised
        dg: Its derivative
        k: Exponent, k != 1
        n_points: Gauss-Legendre points

    Raises:
        UnsupportedExponentError: For k = 1
    """
    if not math.isfinite(k):
        raise InvalidInputError(f"Hardy exponent must be finite, got {k}")
    if k == 1.0:
        raise UnsupportedExponentError("Hardy inequality has no k = 1 branch")
    s, wts = _unit_interval_rule(n_points)
    gs = np.broadcast_to(np.asarray(g(s), dtype=float), s.shape)
    dgs = np.broadcast_to(np.asarray(dg(s), dtype=float), s.shape)
    if k > 1.0:
        lhs = float(np.sum(wts * s ** (k - 2.0) * gs ** 2))
        rhs = float(np.sum(wts * s ** k * (gs ** 2 + dgs ** 2)))
    else:
        g0 = float(np.asarray(g(np.array([0.0])), dtype=float).ravel()[0])
        lhs = float(np.sum(wts * s ** (k - 2.0) * (gs - g0) ** 2))
        rhs = float(np.sum(wts * s ** k * dgs ** 2))
    ratio = lhs / rhs if rhs > 0.0 else math.inf
    return HardyResult(lhs=lhs, rhs=rhs, ratio=ratio)


def hardy_variant_constant(g: Callable, dg: Callable, k: float, delta: float,
                           n_points: int = HARDY_POINTS) -> float:
    """
    Smallest C with int s^(k-2) g^2 <= delta int s^k g'^2 + C int s^k g^2 for this g.

    Raises:
        UnsupportedExponentError: For k <= 1
    """
    if not k > 1.0:
        raise UnsupportedExponentError(f"Hardy variant needs k > 1, got {k}")
    if not delta > 0.0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    s, wts = _unit_interval_rule(n_points)
    gs = np.broadcast_to(np.asarray(g(s), dtype=float), s.shape)
    dgs = np.broadcast_to(np.asarray(dg(s), dtype=float), s.shape)
    lhs = float(np.sum(wts * s ** (k - 2.0) * gs ** 2))
    grad = float(np.sum(wts * s ** k * dgs ** 2))
    mass = float(np.sum(wts * s ** k * gs ** 2))
    if mass == 0.0:
        return 0.0
    return max(0.0, (lhs - delta * grad) / mass)


def weighted_hardy_ratio(F: np.ndarray, weight: WeightField, alpha: float, grid: GridSpec) -> float:
    """
    int w^(a-1) |F|^2 / int w^(a+1) (|d_3 F|^2 + |F|^2) on the grid.

    Raises:
        InvalidInputError: For alpha < 1
    """
    if alpha < 1.0:
        raise InvalidInputError(f"Weighted Hardy ratio needs alpha >= 1, got {alpha}")
    F = np.asarray(F, dtype=float)
    sq = frobenius_sq(F) if F.ndim > 3 else F * F
    d3 = grid.derivative(F, 2)
    d3_sq = frobenius_sq(d3) if F.ndim > 3 else d3 * d3
    lhs = float(grid.integrate(weight.power(alpha - 1.0) * sq))
    rhs = float(grid.integrate(weight.power(alpha + 1.0) * (d3_sq + sq)))
    return lhs / rhs if rhs > 0.0 else math.inf


class WeightedNorms(NamedTuple):
    X: float
    Y: float
    Z: float
    sup_ratio: float


def weighted_space_norms(F: np.ndarray, weight: WeightField, alpha: float, b: int,
                         grid: GridSpec, defo: Optional[DeformationData] = None) -> WeightedNorms:
    """
    Norms of the weighted spaces X, Y and Z of order b.

        |F|_X^2 = sum int w^(a+n) |d F|^2
        |F|_Y^2 = sum int w^(1+a+n) |D_eta d F|^2
        |F|_Z^2 = sum int w^(1+a+n) |d F|^2

    over |m| + n <= b. D_eta reduces to D without a deformation.
    sup_ratio = max |F| / |F|_X (0 for F = 0).

    Raises:
        InvalidInputError: If b is too high for the stencils
    """
    F = np.asarray(F, dtype=float)
    scalar = F.ndim == 3
    X = Y = Z = 0.0
    for m, n in grid.multi_indices(b):
        if grid.is_tangential_zero(m):
            continue
        grid.check_order(m, n)
        dF = grid.mixed_derivative(F, m, n)
        DF = grid.gradient(dF)
        if defo is not None:
            if scalar:
                DF = np.einsum("sr...,s...->r...", defo.A, DF)
            else:
                DF = lie_from_gradient(DF, defo.A).gradient
        sq = dF * dF if scalar else frobenius_sq(dF)
        X += float(grid.integrate(weight.power(alpha + n) * sq))
        Y += float(grid.integrate(weight.power(1.0 + alpha + n) * frobenius_sq(DF)))
        Z += float(grid.integrate(weight.power(1.0 + alpha + n) * sq))
    X, Y, Z = math.sqrt(X), math.sqrt(Y), math.sqrt(Z)
    sup = float(np.max(np.abs(F)))
    return WeightedNorms(X=X, Y=Y, Z=Z, sup_ratio=sup / X if X > 0.0 else 0.0)


def lagrangian_energy(state: FlowState, defo: DeformationData, coeffs: CoefficientData,
                      weight: WeightField, grid: GridSpec, params: ThermoParams,
                      rule: str = "simpson") -> float:
    """
    Conserved energy of the Lagrangian system, any eps:

        E = int w^a [(1 + e^2 h) G |v|^2 - |v|^2 / (1 + 1/G)] + a w^a N^(1/a) / G

    with N = w^a / (G J), so N^(1/a) = h / (1 + a). At eps = 0 this is
    1/2 int w^a |v|^2 + a int w^(1+a) J^(-1/a).
    """
    alpha = params.alpha
    G = coeffs.Gamma
    q = np.sum(state.eta_t * state.eta_t, axis=0)
    wa = weight.power(alpha)
    density = wa * ((1.0 + params.eps2 * coeffs.h) * G * q - q / (1.0 + 1.0 / G)
                    + alpha * coeffs.h / ((1.0 + alpha) * G))
    return float(grid.integrate(density, rule=rule))


def energy_rate_majorant(E: float, c0: float, exponent: float = MAJORANT_EXPONENT) -> float:
    """c0 (1 + E)^exponent."""
    return c0 * (1.0 + E) ** exponent


def calibrate_majorant(rates: List[float], energies: List[float],
                       exponent: float = MAJORANT_EXPONENT, safety: float = 1.0) -> float:
    """Smallest c0 covering the given (rate, energy) samples, times safety."""
    if len(rates) != len(energies) or not rates:
        raise InvalidInputError("Majorant calibration needs matching nonempty samples")
    ratios = [abs(r) / (1.0 + e) ** exponent for r, e in zip(rates, energies)]
    return safety * max(ratios)
