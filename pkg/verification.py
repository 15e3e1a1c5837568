#!/usr/bin/env python3
"""
Invariant and property suite behind the `verify` command.

Each check is a function returning a CheckResult; CHECKS maps check
names to (description, function). Refinement checks measure orders away
from the faces (two node layers are skipped) since the one-sided face
stencils leave a first-order error in differenced products.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dynamics import assemble_coefficients, structure_identity_residual
from energy_diag import energy_functionals, hardy_check
from eos import ThermoParams, density_consistency_ratio
from grid import GridSpec, frobenius_sq, refinement_order
from kinematics import (
    FlowState,
    compute_deformation,
    det3,
    identity_state,
    lie_gradient,
    matmul,
    piola_residual,
    verify_rate_identities,
)
from profiles import get_preset
from solver import Problem, SolverConfig, monitor_quantities, run
from vorticity import assemble_curl_structure, lagrangian_curl_chi, structure_matrices
from weight import make_weight

logger = logging.getLogger(__name__)

AMPLITUDE = 0.05
FACE_LAYERS = 2


@dataclass
class CheckResult:
    """
    Outcome of one check.

    Attributes:
        name: Registry name
        passed: Verdict
        value: Measured quantity
        threshold: Acceptance rule as text
        detail: Extra numbers for the table
    """

    name: str
    passed: bool
    value: float
    threshold: str
    detail: str = ""


def coupled_map_3d(grid: GridSpec, amplitude: float = AMPLITUDE) -> np.ndarray:
    """Perturbed identity whose components depend on all three coordinates."""
    X1, X2, X3 = grid.coordinates()
    two_pi = 2.0 * math.pi
    return np.stack([
        X1 + amplitude * np.sin(two_pi * X2) * X3 ** 2,
        X2 + amplitude * np.sin(two_pi * X1) * np.sin(math.pi * X3),
        X3 + amplitude * np.cos(two_pi * X1) * np.cos(two_pi * X2) * X3 * (1.0 - X3),
    ])


def coupled_map_2d(grid: GridSpec, amplitude: float = AMPLITUDE) -> np.ndarray:
    """Perturbed identity in the (x1, x3) plane."""
    X1, X2, X3 = grid.coordinates()
    two_pi = 2.0 * math.pi
    return np.stack([
        X1 + amplitude * np.sin(two_pi * X1) * X3 ** 2,
        X2,
        X3 + amplitude * np.cos(two_pi * X1) * np.sin(math.pi * X3),
    ])


def _away_from_faces(f: np.ndarray) -> np.ndarray:
    return f[..., FACE_LAYERS:-FACE_LAYERS]


def _state(eta: np.ndarray, eta_t: Optional[np.ndarray] = None) -> FlowState:
    return FlowState(eta=eta, eta_t=np.zeros_like(eta) if eta_t is None else eta_t)


def piola_errors(sizes: Sequence[int]) -> Tuple[List[float], List[float]]:
    """Max |d_k(J A^k_i)| of the 3D coupled map on (n, n, n + 1) grids."""
    hs, errors = [], []
    for n in sizes:
        grid = GridSpec((n, n, n + 1))
        defo = compute_deformation(_state(coupled_map_3d(grid)), grid)
        errors.append(float(np.max(np.abs(_away_from_faces(piola_residual(defo, grid))))))
        hs.append(grid.spacing[2])
    return hs, errors


def check_piola_order() -> CheckResult:
    hs, errors = piola_errors((12, 24, 48))
    order = refinement_order(hs, errors)
    return CheckResult("piola-order", 1.7 <= order <= 2.3, order, "order in [1.7, 2.3]",
                       "errors " + ", ".join(f"{e:.2e}" for e in errors))


def check_curl_norm_identity() -> CheckResult:
    grid = GridSpec((8, 8, 9))
    defo = compute_deformation(_state(coupled_map_3d(grid)), grid)
    rng = np.random.default_rng(7)
    F = rng.standard_normal(grid.vector_shape)
    lie = lie_gradient(F, defo, grid)
    full = frobenius_sq(lie.Curl)
    vector = np.sum(lie.curl * lie.curl, axis=0)
    defect = float(np.max(np.abs(full - 2.0 * vector) / np.maximum(1.0, full)))
    return CheckResult("curl-norm-identity", defect <= 1e-12, defect,
                       "|Curl|^2 - 2|curl|^2 <= 1e-12 (relative)")


def curl_of_gradient_errors(sizes: Sequence[int]) -> Tuple[List[float], List[float]]:
    """Max |curl_eta (A^T D phi)| of the 2D coupled map on (n, 1, n + 1) grids."""
    hs, errors = [], []
    for n in sizes:
        grid = GridSpec((n, 1, n + 1))
        defo = compute_deformation(_state(coupled_map_2d(grid)), grid)
        X1, _, X3 = grid.coordinates()
        phi = np.sin(2.0 * math.pi * X1) * np.cos(math.pi * X3) + X3 ** 2
        F = np.einsum("ki...,k...->i...", defo.A, grid.gradient(phi))
        curl = lie_gradient(F, defo, grid).curl
        errors.append(float(np.max(np.abs(_away_from_faces(curl)))))
        hs.append(grid.spacing[2])
    return hs, errors


def check_curl_of_gradient() -> CheckResult:
    hs, errors = curl_of_gradient_errors((32, 64, 128, 256))
    order = refinement_order(hs, errors)
    return CheckResult("curl-of-gradient", order >= 1.7, order, "order >= 1.7",
                       "errors " + ", ".join(f"{e:.2e}" for e in errors))


def rate_identity_path(grid: GridSpec, dt: float, count: int = 5) -> List[FlowState]:
    """eta = (x1, x2, x3 (1 + t/10)^3) sampled at k dt."""
    X = grid.identity_map()
    path = []
    for k in range(count):
        tk = k * dt
        eta = X.copy()
        eta[2] = X[2] * (1.0 + 0.1 * tk) ** 3
        v = np.zeros_like(X)
        v[2] = X[2] * 0.3 * (1.0 + 0.1 * tk) ** 2
        path.append(FlowState(eta=eta, eta_t=v, time=tk))
    return path


def check_rate_identities() -> CheckResult:
    grid = GridSpec.planar(33)
    report = verify_rate_identities(rate_identity_path(grid, 1e-3), grid)
    worst = max(report.max_A_residual, report.max_J_residual)
    return CheckResult("rate-identities", worst <= 1e-6, worst, "<= 1e-6 at dt = 1e-3",
                       f"A {report.max_A_residual:.2e}, J {report.max_J_residual:.2e}")


def _moving_state(grid: GridSpec) -> FlowState:
    X1, X2, X3 = grid.coordinates()
    v = np.stack([0.05 * np.sin(math.pi * X3), np.zeros_like(X3), 0.2 * (X3 - 0.5)])
    return _state(grid.identity_map(), v)


def check_newtonian_coefficients() -> CheckResult:
    grid = GridSpec.planar(33)
    state = _moving_state(grid)
    defo = compute_deformation(state, grid)
    coeffs = assemble_coefficients(state, defo, make_weight("parabolic", grid), ThermoParams(2.0, 0.0))
    exact = np.array_equal(coeffs.B, grid.identity_tensor()) and not np.any(coeffs.C)
    deviation = float(np.max(np.abs(coeffs.B - grid.identity_tensor())) + np.max(np.abs(coeffs.C)))
    return CheckResult("newtonian-coefficients", exact, deviation, "B = I and C = 0 exactly")


def check_rest_state_structure() -> CheckResult:
    grid = GridSpec.planar(33)
    params = ThermoParams(2.0, 0.3)
    state = identity_state(grid)
    defo = compute_deformation(state, grid)
    coeffs = assemble_coefficients(state, defo, make_weight("parabolic", grid), params)
    cs = assemble_curl_structure(state, defo, coeffs, params, with_X=False)
    eye = grid.identity_tensor()
    exact = (not np.any(coeffs.C) and np.array_equal(cs.S, eye)
             and np.array_equal(cs.U, eye) and not np.any(cs.R))
    deviation = float(np.max(np.abs(coeffs.C)) + np.max(np.abs(cs.S - eye))
                      + np.max(np.abs(cs.U - eye)) + np.max(np.abs(cs.R)))
    return CheckResult("rest-state-structure", exact, deviation, "C = 0, S = U = I, R = 0 exactly")


def random_admissible_velocities(rng: np.random.Generator, eps: float, count: int,
                                 max_speed: float = 0.95) -> np.ndarray:
    """(3, count) velocities with eps |v| < max_speed."""
    direction = rng.standard_normal((3, count))
    direction /= np.linalg.norm(direction, axis=0)
    speed = rng.uniform(0.0, max_speed, count) / eps
    return direction * speed


def check_structure_determinant(samples: int = 10_000) -> CheckResult:
    rng = np.random.default_rng(11)
    per_eps = 100
    worst_det = worst_inv = 0.0
    for eps in rng.uniform(0.01, 1.0, samples // per_eps):
        params = ThermoParams(2.0, float(eps))
        v = random_admissible_velocities(rng, eps, per_eps)
        S, U, Gamma = structure_matrices(v, params)
        worst_det = max(worst_det, float(np.max(np.abs(det3(S) - Gamma ** 2) / Gamma ** 2)))
        US = matmul(U, S)
        worst_inv = max(worst_inv, float(np.max(np.abs(US - np.eye(3)[:, :, None]))))
    worst = max(worst_det, worst_inv)
    return CheckResult("det-S-gamma-sq", worst <= 1e-12, worst, "<= 1e-12",
                       f"det {worst_det:.1e}, US - I {worst_inv:.1e}, {samples} samples")


def check_energy_values() -> CheckResult:
    grid = GridSpec.planar(257)
    params = ThermoParams(2.0, 0.0)
    state = identity_state(grid)
    defo = compute_deformation(state, grid)
    weight = make_weight("parabolic", grid)
    coeffs = assemble_coefficients(state, defo, weight, params)
    cs = assemble_curl_structure(state, defo, coeffs, params, with_X=False)
    report = energy_functionals(state, defo, coeffs, cs, weight, grid, params, order=0)
    values = report.term((0, 0), 0)
    error = max(abs(values.II - 0.3), abs(values.III - 0.1))
    return CheckResult("energy-identity-values", error <= 1e-4, error, "|E - exact| <= 1e-4",
                       f"E_II {values.II:.6f} (0.3), E_III {values.III:.6f} (0.1)")


HARDY_FAMILY = {
    "1": (lambda s: np.ones_like(s), lambda s: np.zeros_like(s)),
    "s": (lambda s: s, lambda s: np.ones_like(s)),
    "s^2": (lambda s: s * s, lambda s: 2.0 * s),
    "sin(pi s)": (lambda s: np.sin(math.pi * s), lambda s: math.pi * np.cos(math.pi * s)),
}


def check_hardy_family() -> CheckResult:
    ratios = {name: hardy_check(g, dg, 2.0).ratio for name, (g, dg) in HARDY_FAMILY.items()}
    worst = max(ratios.values())
    passed = all(math.isfinite(r) for r in ratios.values()) and worst <= 10.0
    return CheckResult("hardy-family", passed, worst, "max ratio <= 10 (k = 2)",
                       ", ".join(f"{n}: {r:.3f}" for n, r in ratios.items()))


def check_hardy_exact() -> CheckResult:
    g, dg = HARDY_FAMILY["1"]
    result = hardy_check(g, dg, 2.0)
    error = max(abs(result.lhs - 1.0), abs(result.rhs - 1.0 / 3.0))
    return CheckResult("hardy-exact", error <= 1e-10, error, "lhs = 1, rhs = 1/3 to 1e-10")


def check_structure_identity_forms() -> CheckResult:
    grid = GridSpec((8, 8, 9))
    defo = compute_deformation(_state(coupled_map_3d(grid)), grid)
    worst = 0.0
    for l in range(3):
        divergence = structure_identity_residual(defo, l, grid, 1.0, form="divergence")
        curl = structure_identity_residual(defo, l, grid, 1.0, form="curl")
        worst = max(worst, float(np.max(np.abs(divergence - curl))))
    return CheckResult("structure-identity-forms", worst <= 1e-10, worst,
                       "divergence and curl forms agree to 1e-10")


def check_density_consistency() -> CheckResult:
    rho = np.linspace(0.05, 4.0, 40)
    ratio = np.asarray(density_consistency_ratio(rho, ThermoParams(2.0, 0.3)))
    spread = float((ratio.max() - ratio.min()) / ratio.mean())
    return CheckResult("density-consistency", spread <= 1e-8, spread,
                       "exp-integral N / EOS N constant at gamma = 2")


def check_planar_irrotational(n3: int = 65, t_end: float = 0.5) -> CheckResult:
    preset = get_preset("outflow")
    config = SolverConfig(params=ThermoParams(2.0, 0.2), grid=GridSpec.planar(n3),
                          eta0=preset["eta0"], eta1=preset["eta1"], t_end=t_end, cadence=1,
                          diagnostics=False, show_progress=False)
    traj = run(config)
    worst = 0.0
    for state in traj:
        defo = compute_deformation(state, traj.grid)
        coeffs = assemble_coefficients(state, defo, traj.weight, traj.params)
        worst = max(worst, float(np.max(np.abs(lagrangian_curl_chi(state, defo, coeffs, traj.grid)))))
    return CheckResult("planar-irrotational", worst <= 1e-8, worst, "|Curl chi| <= 1e-8",
                       f"{len(traj)} states to t = {t_end}")


def check_initial_g0_defect() -> CheckResult:
    preset = get_preset("outflow")
    problem = Problem(SolverConfig(params=ThermoParams(2.0, 0.2), grid=GridSpec.planar(129),
                                   eta0=preset["eta0"], eta1=preset["eta1"], show_progress=False))
    row, _, _ = monitor_quantities(problem.initial(), problem.weight, problem.grid, problem.params)
    return CheckResult("g0-defect", row.g0_defect <= 1e-10, row.g0_defect, "<= 1e-10 at t = 0")


CHECKS: Dict[str, Tuple[str, Callable[[], CheckResult]]] = {
    "piola-order": ("Cofactor divergence converges at second order", check_piola_order),
    "curl-norm-identity": ("|Curl F|^2 = 2 |curl F|^2 nodewise", check_curl_norm_identity),
    "curl-of-gradient": ("curl_eta of a Lagrangian gradient converges to 0", check_curl_of_gradient),
    "rate-identities": ("d_t A and d_t J identities along a path", check_rate_identities),
    "newtonian-coefficients": ("eps = 0 gives B = I, C = 0", check_newtonian_coefficients),
    "rest-state-structure": ("Rest state gives C = 0, S = U = I, R = 0", check_rest_state_structure),
    "det-S-gamma-sq": ("det S = Gamma^2 and U S = I on random samples", check_structure_determinant),
    "energy-identity-values": ("E_II and E_III at the identity state", check_energy_values),
    "hardy-family": ("Hardy ratios bounded on the test family", check_hardy_family),
    "hardy-exact": ("Hardy quadrature reproduces g = 1", check_hardy_exact),
    "structure-identity-forms": ("Both structure identity forms agree", check_structure_identity_forms),
    "density-consistency": ("Energy-pair density matches the EOS at gamma = 2", check_density_consistency),
    "g0-defect": ("N Gamma J = w^alpha at t = 0", check_initial_g0_defect),
    "planar-irrotational": ("Planar normal motion stays irrotational", check_planar_irrotational),
}


def get_check(name: str) -> Callable[[], CheckResult]:
    """
    Get a check by name.

    Raises:
        ValueError: If check name is not found
    """
    if name not in CHECKS:
        available = ", ".join(CHECKS.keys())
        raise ValueError(f"Unknown check '{name}'. Available: {available}")
    return CHECKS[name][1]


def list_checks() -> List[str]:
    return list(CHECKS.keys())


def run_checks(names: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """
    Run the named checks (all by default).

    A check that raises is recorded as failed with the error as detail.
    """
    selected = list(names) if names else list_checks()
    functions = [(name, get_check(name)) for name in selected]
    results = []
    for name, function in functions:
        try:
            result = function()
        except Exception as e:  # noqa: BLE001
            logger.error("check %s raised: %s", name, e)
            result = CheckResult(name, False, float("nan"), "-", f"{type(e).__name__}: {e}")
        logger.info("check %s: %s (%.3e)", name, "PASS" if result.passed else "FAIL", result.value)
        results.append(result)
    return results
