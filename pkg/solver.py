#!/usr/bin/env python3
"""
Time integration of the planar free-boundary problem.

The flow map eta(t, x) = (x1 + s1(t, x3), x2 + s2(t, x3), eta^3(t, x3)) is
advanced by classical RK4 on (eta, d_t eta). The acceleration comes from
the w^alpha-cancelled solve in dynamics, so boundary nodes need no special
treatment. Tangential components carry shear (and vorticity); the normal
component carries the vacuum dynamics.
"""

import logging
import math
import time as wallclock
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
import sympy as sy
from tqdm import tqdm

from config import (
    DEFAULT_CADENCE,
    DEFAULT_CFL,
    DEFAULT_N3,
    DEFAULT_PROFILE,
    DEFAULT_T_END,
    J_ABORT,
    MAJORANT_EXPONENT,
    MAJORANT_SAFETY,
    MAJORANT_WARMUP,
    MAJORANT_WINDOW,
    PHYSICAL_VACUUM_BRACKET,
    SHOW_PROGRESS,
    SUPERLUMINAL_MARGIN,
)
from dynamics import CoefficientData, acceleration, assemble_coefficients, chi_h_residual
from energy_diag import (
    calibrate_majorant,
    energy_functionals,
    energy_rate_majorant,
    lagrangian_energy,
)
from eos import (
    ThermoParams,
    energy_density,
    energy_density_field,
    number_density_from_energy_density,
    sound_speed_sq,
    speed_sq,
)
from errors import (
    DegenerateMapError,
    DomainError,
    InvalidInputError,
    SimulationAbortedError,
)
from expressions import ExpressionLike, field_function, parse_vector, sample_vector, t as t_symbol
from grid import GridSpec
from kinematics import DeformationData, FlowState, compute_deformation
from trajectory import Event, MonitorRow, Trajectory
from vorticity import CurlHistory, assemble_curl_structure, curl_residual, curl_terms
from weight import WeightField, make_weight

logger = logging.getLogger(__name__)

IDENTITY_MAP = ("x1", "x2", "x3")
AT_REST = ("0", "0", "0")


@dataclass
class SolverConfig:
    """
    Parameters of one planar run.

    Attributes:
        params: Gas parameters
        grid: Planar grid (n1 = n2 = 1)
        profile: Weight profile name or "custom-expression"
        weight_expression: Expression for custom profiles
        eta0: Initial flow map components
        eta1: Initial velocity components
        t_end: Final time (0 gives a single t = 0 record)
        cfl: Courant number in (0, 1]
        dt: Fixed step; None selects the CFL step
        forcing: Body force per unit w^alpha, components in x and t
        exact: Exact flow map in x and t; overrides eta0/eta1
        cadence: Store every cadence-th step (and the last)
        order: Diagnostic order; None for the default
        diagnostics: Compute energy reports at cadence points
        show_progress: Show a tqdm bar
    """

    params: ThermoParams = field(default_factory=ThermoParams)
    grid: GridSpec = field(default_factory=lambda: GridSpec.planar(DEFAULT_N3))
    profile: str = DEFAULT_PROFILE
    weight_expression: Optional[str] = None
    eta0: Sequence[ExpressionLike] = IDENTITY_MAP
    eta1: Sequence[ExpressionLike] = AT_REST
    t_end: float = DEFAULT_T_END
    cfl: float = DEFAULT_CFL
    dt: Optional[float] = None
    forcing: Optional[Sequence[ExpressionLike]] = None
    exact: Optional[Sequence[ExpressionLike]] = None
    cadence: int = DEFAULT_CADENCE
    order: Optional[int] = None
    diagnostics: bool = True
    show_progress: bool = SHOW_PROGRESS

    def __post_init__(self):
        if not self.grid.is_planar:
            raise InvalidInputError(
                f"Time integration needs a planar grid (n1 = n2 = 1), got {self.grid.shape}"
            )
        if not (math.isfinite(self.t_end) and self.t_end >= 0.0):
            raise InvalidInputError(f"t_end must be >= 0, got {self.t_end}")
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidInputError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        if int(self.cadence) < 1:
            raise InvalidInputError(f"cadence must be >= 1, got {self.cadence}")


class Evaluation(NamedTuple):
    """A state with its acceleration and the tensors used to get it."""

    state: FlowState
    defo: DeformationData
    coeffs: CoefficientData


class Problem:
    """
    A configured run: weight, initial data and forcing sampled on the grid.
    """

    def __init__(self, config: SolverConfig):
        """
        Initialize problem.

        Raises:
            InvalidWeightError: If the weight profile fails validation
            InvalidInputError: If an expression is malformed
        """
        self.config = config
        self.grid = config.grid
        self.params = config.params
        self.weight: WeightField = make_weight(config.profile, self.grid, config.weight_expression)
        self.forcing: Optional[Callable[[float], np.ndarray]] = None
        if config.forcing is not None:
            self.forcing = field_function(parse_vector(config.forcing, allow_time=True), self.grid)

        if config.exact is not None:
            exact = parse_vector(config.exact, allow_time=True)
            self.exact = field_function(exact, self.grid)
            eta0 = [e.subs(t_symbol, 0) for e in exact]
            eta1 = [sy.diff(e, t_symbol).subs(t_symbol, 0) for e in exact]
        else:
            self.exact = None
            eta0 = parse_vector(config.eta0)
            eta1 = parse_vector(config.eta1)
        self.eta0 = sample_vector(eta0, self.grid)
        self.eta1 = sample_vector(eta1, self.grid)
        self.initial_data = {"eta0": [str(e) for e in eta0], "eta1": [str(e) for e in eta1]}

    def header(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "grid": list(self.grid.shape),
            "weight": self.weight.header(),
            **self.initial_data,
        }

    def evaluate(self, eta: np.ndarray, v: np.ndarray, t: float) -> Evaluation:
        """
        Acceleration at (eta, v, t).

        Raises:
            DegenerateMapError: If J <= 0
            SuperluminalError: If eps |v| >= 1
        """
        state = FlowState(eta=eta, eta_t=v, time=t)
        defo = compute_deformation(state, self.grid)
        coeffs = assemble_coefficients(state, defo, self.weight, self.params)
        forcing = self.forcing(t) if self.forcing is not None else None
        a = acceleration(state, defo, coeffs, self.weight, self.grid, self.params, forcing)
        return Evaluation(state.with_acceleration(a), defo, coeffs)

    def initial(self) -> Evaluation:
        return self.evaluate(self.eta0.copy(), self.eta1.copy(), 0.0)

    def cfl_step(self, ev: Evaluation) -> float:
        """cfl dx3 / max over interior nodes of sqrt(csq) max(1, 1/J)."""
        N = self.weight.power(self.params.alpha) / (ev.coeffs.Gamma * ev.defo.J)
        csq = sound_speed_sq(N, self.params, allow_vacuum=True)
        speed = np.sqrt(csq) * np.maximum(1.0, 1.0 / ev.defo.J)
        c_max = float(np.max(speed[..., 1:-1]))
        if not c_max > 0.0:
            raise InvalidInputError("No positive wave speed in the interior")
        return self.config.cfl * self.grid.spacing[2] / c_max


def _abort(message: str, ev: Evaluation, reason: str) -> SimulationAbortedError:
    logger.error("%s (t = %.6g)", message, ev.state.time)
    return SimulationAbortedError(message, state=ev.state, time=ev.state.time, reason=reason)


def rk4_step(problem: Problem, ev: Evaluation, dt: float, t_new: Optional[float] = None) -> Evaluation:
    """
    One classical RK4 step of (eta, v)' = (v, a).

    Raises:
        SimulationAbortedError: On J <= J_ABORT, eps |v| near 1, non-finite
            values, or a failed stage; carries the last valid state
    """
    s = ev.state
    t0 = s.time
    t_new = t0 + dt if t_new is None else t_new
    eta0, v0, a0 = s.eta, s.eta_t, s.eta_tt
    try:
        e2 = problem.evaluate(eta0 + 0.5 * dt * v0, v0 + 0.5 * dt * a0, t0 + 0.5 * dt)
        k2x, k2v = e2.state.eta_t, e2.state.eta_tt
        e3 = problem.evaluate(eta0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v, t0 + 0.5 * dt)
        k3x, k3v = e3.state.eta_t, e3.state.eta_tt
        e4 = problem.evaluate(eta0 + dt * k3x, v0 + dt * k3v, t0 + dt)
        k4x, k4v = e4.state.eta_t, e4.state.eta_tt
        eta = eta0 + (dt / 6.0) * (v0 + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v0 + (dt / 6.0) * (a0 + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(v))):
            raise _abort("Non-finite state", ev, "non-finite")
        new = problem.evaluate(eta, v, t_new)
    except DegenerateMapError as e:
        raise _abort(f"Flow map degenerated: {e}", ev, "degenerate") from e
    except DomainError as e:
        raise _abort(f"Superluminal state: {e}", ev, "superluminal") from e

    min_J = float(np.min(new.defo.J))
    if min_J <= J_ABORT:
        raise _abort(f"Jacobian collapsed: min J = {min_J:.3e}", ev, "degenerate")
    eps_v = problem.params.eps * math.sqrt(float(np.max(speed_sq(v))))
    if eps_v >= 1.0 - SUPERLUMINAL_MARGIN:
        raise _abort(f"Velocity reached the light speed: eps|v| = {eps_v:.12f}", ev, "superluminal")
    if not np.all(np.isfinite(new.state.eta_tt)):
        raise _abort("Non-finite acceleration", ev, "non-finite")
    return new


@dataclass
class _Reference:
    vj: float
    lagrangian: float
    slopes: Optional[np.ndarray] = None


def _relative(x: float, x0: float) -> float:
    if not math.isfinite(x0):
        return float("nan")
    return abs(x - x0) / abs(x0) if x0 != 0.0 else abs(x - x0)


def _total_energy(ev: Evaluation, weight: WeightField, grid: GridSpec, params: ThermoParams,
                  N: np.ndarray) -> float:
    """int (V o eta) J dx, Simpson rule; NaN at eps = 0."""
    if params.eps == 0.0:
        return float("nan")
    V = energy_density_field(energy_density(N, params), ev.state.eta_t, params)
    return float(grid.integrate(V * ev.defo.J, rule="simpson"))


def monitor_quantities(ev: Evaluation, weight: WeightField, grid: GridSpec,
                       params: ThermoParams, reference: Optional[_Reference] = None):
    """
    Monitor row of one state plus the raw invariants.

    Returns:
        (MonitorRow, int V J, Lagrangian energy)
    """
    wa = weight.power(params.alpha)
    N = wa / (ev.coeffs.Gamma * ev.defo.J)
    N_back = number_density_from_energy_density(energy_density(N, params), params)
    g0_defect = float(np.max(np.abs(N_back * ev.coeffs.Gamma * ev.defo.J - wa)))
    vj = _total_energy(ev, weight, grid, params, N)
    lag = lagrangian_energy(ev.state, ev.defo, ev.coeffs, weight, grid, params, rule="simpson")
    res = chi_h_residual(ev.state, ev.defo, ev.coeffs, grid, params)

    ref = reference or _Reference(vj=vj, lagrangian=lag)
    lag_drift = _relative(lag, ref.lagrangian)
    row = MonitorRow(
        t=ev.state.time,
        g0_defect=g0_defect,
        energy_drift=_relative(vj, ref.vj) if params.eps > 0.0 else lag_drift,
        lagrangian_drift=lag_drift,
        chi_h_res=float(np.max(np.abs(res))),
        min_J=float(np.min(ev.defo.J)),
        max_eps_v=params.eps * math.sqrt(float(np.max(speed_sq(ev.state.eta_t)))),
    )
    return row, vj, lag


def vacuum_slopes(ev: Evaluation, weight: WeightField, grid: GridSpec,
                  params: ThermoParams) -> np.ndarray:
    """|d_3 csq| at the last interior node next to each face."""
    N = weight.power(params.alpha) / (ev.coeffs.Gamma * ev.defo.J)
    d3 = grid.derivative(sound_speed_sq(N, params, allow_vacuum=True), 2)
    return np.array([float(np.max(np.abs(d3[..., 1]))), float(np.max(np.abs(d3[..., -2])))])


def conserved_monitor(traj: Trajectory) -> List[MonitorRow]:
    """
    Recompute the conserved-quantity log of a stored trajectory.

    Drifts are relative to the first stored state.

    Raises:
        InvalidInputError: If the trajectory has no weight or fewer than 2 states
    """
    if traj.weight is None:
        raise InvalidInputError("Trajectory carries no weight")
    if len(traj) < 2:
        raise InvalidInputError(f"Monitor needs >= 2 states, got {len(traj)}")
    grid, params, weight = traj.grid, traj.params, traj.weight
    rows = []
    reference = None
    for state in traj:
        defo = compute_deformation(state, grid)
        coeffs = assemble_coefficients(state, defo, weight, params)
        row, vj, lag = monitor_quantities(Evaluation(state, defo, coeffs), weight, grid, params, reference)
        if reference is None:
            reference = _Reference(vj=vj, lagrangian=lag)
        rows.append(row)
    return rows


def majorant_monitor(traj: Trajectory, exponent: float = MAJORANT_EXPONENT,
                     safety: float = MAJORANT_SAFETY, window: float = MAJORANT_WINDOW) -> List[Event]:
    """
    Monitored energy inequality.

    For n <= 2 the rate d/dt [E^(I)_0n + (1 + 1/alpha) E^(II)_0n] between
    cadence points is compared with c0 (1 + E)^c1, E = E_N^(I) + E_N^(III).
    c0 is refitted before every interval on all earlier intervals, so the
    majorant envelopes the history of the run. The first `window` fraction
    of intervals (at least MAJORANT_WARMUP) only calibrates.

    Returns:
        Violation events (also logged as warnings)
    """
    reports = [r for r in traj.reports if r is not None]
    if len(reports) < 3:
        return []
    alpha = traj.params.alpha
    times = np.array([r.time for r in reports])
    energies = np.array([r.E_I + r.E_III for r in reports])
    intervals = len(reports) - 1
    series = [np.array([r.term((0, 0), n).I + (1.0 + 1.0 / alpha) * r.term((0, 0), n).II
                        for r in reports])
              for n in range(min(2, reports[0].order) + 1)]
    rates = np.array([[(s[k + 1] - s[k]) / (times[k + 1] - times[k]) for s in series]
                      for k in range(intervals)])
    levels = np.maximum(energies[:-1], energies[1:])

    warmup = max(MAJORANT_WARMUP, int(window * intervals))
    events = []
    for k in range(warmup, intervals):
        history = rates[:k].ravel()
        c0 = calibrate_majorant(list(history), list(np.repeat(levels[:k], len(series))),
                                exponent, safety)
        bound = energy_rate_majorant(float(levels[k]), c0, exponent)
        worst = float(np.max(np.abs(rates[k])))
        if worst > bound:
            message = f"energy rate {worst:.3e} exceeds majorant {bound:.3e}"
            logger.warning("t = %.6g: %s", times[k + 1], message)
            events.append(Event(kind="majorant", time=float(times[k + 1]), message=message))
    return events


def run(config: SolverConfig) -> Trajectory:
    """
    Integrate from the initial data to t_end.

    Returns:
        Trajectory with states (carrying eta_tt), energy reports and monitor
        rows at every cadence point, the first and the last step

    Raises:
        SimulationAbortedError: On breakdown, carrying the last valid state
        InvalidInputError / InvalidWeightError: On bad configuration
    """
    problem = Problem(config)
    grid, params, weight = problem.grid, problem.params, problem.weight
    ev = problem.initial()
    traj = Trajectory(grid, params, weight=weight, header=problem.header())

    logger.info("run: grid %s, gamma=%g, eps=%g, profile=%s, t_end=%g",
                grid.shape, params.gamma, params.eps, weight.name, config.t_end)
    start = wallclock.perf_counter()

    history = CurlHistory()
    terms = curl_terms(ev.state, ev.defo, ev.coeffs, grid, params)
    history.start(0.0, terms.curl_chi, terms.time_commutator, terms.gamma_commutator)

    _, vj0, lag0 = monitor_quantities(ev, weight, grid, params)
    reference = _Reference(vj=vj0, lagrangian=lag0, slopes=vacuum_slopes(ev, weight, grid, params))
    lo, hi = PHYSICAL_VACUUM_BRACKET

    def record(current: Evaluation, curl_chi: np.ndarray) -> None:
        report = None
        cs = assemble_curl_structure(current.state, current.defo, current.coeffs, params, history)
        if config.diagnostics:
            report = energy_functionals(current.state, current.defo, current.coeffs, cs, weight,
                                        grid, params, config.order, curl_chi=curl_chi)
        row, _, _ = monitor_quantities(current, weight, grid, params, reference)
        slopes = vacuum_slopes(current, weight, grid, params)
        outside = (slopes < lo * reference.slopes) | (slopes > hi * reference.slopes)
        if np.any(outside):
            message = f"|d3 csq| near the faces {slopes} left [{lo}, {hi}] x {reference.slopes}"
            logger.warning("t = %.6g: %s", current.state.time, message)
            traj.add_event("physical-vacuum", current.state.time, message)
        residual = curl_residual(current.state, current.defo, cs, grid)
        logger.debug("t = %.6g: E = %s, g0 %.2e, drift %.2e, curl residual %.2e", current.state.time,
                     None if report is None else f"{report.E_total:.10g}", row.g0_defect,
                     row.energy_drift, float(np.max(np.abs(residual))))
        traj.append(current.state, report, row)

    record(ev, terms.curl_chi)
    step = 0
    t_end = config.t_end
    tol = 1e-12 * max(1.0, t_end)
    t = 0.0
    with tqdm(total=t_end, desc="simulate", unit="t", disable=not config.show_progress,
              leave=False) as bar:
        while t_end - t > tol:
            dt = config.dt if config.dt is not None else problem.cfl_step(ev)
            if config.dt is not None:
                t_new = min((step + 1) * config.dt, t_end)
            else:
                t_new = min(t + dt, t_end)
            if t_end - t_new <= tol:
                t_new = t_end
            ev = rk4_step(problem, ev, t_new - t, t_new)
            step += 1
            bar.update(t_new - t)
            t = t_new

            terms = curl_terms(ev.state, ev.defo, ev.coeffs, grid, params)
            history.advance(t, terms.time_commutator, terms.gamma_commutator)
            if step % config.cadence == 0 or t == t_end:
                record(ev, terms.curl_chi)

    traj.steps = step
    if config.diagnostics:
        for event in majorant_monitor(traj):
            traj.add_event(event.kind, event.time, event.message)
    logger.info("run finished: %d steps, %d stored states, %d events, %.2f s",
                step, len(traj), len(traj.events), wallclock.perf_counter() - start)
    return traj


def estimate_time_step(config: SolverConfig) -> float:
    """CFL step of the initial state."""
    problem = Problem(config)
    return problem.cfl_step(problem.initial())


def _integral_step(t_end: float, dt: float) -> float:
    """Largest step <= dt dividing t_end into whole steps."""
    if t_end == 0.0:
        return dt
    return t_end / math.ceil(t_end / dt - 1e-9)


@dataclass
class LimitRow:
    """
    One member of an eps sweep.

    Attributes:
        eps: Inverse light speed
        difference: sup over nodes and cadence times of |eta_eps - eta_0|
        ratio: difference of the previous (larger) eps over this one
        b_deviation: max over nodes and stored states of |B - delta|
        aborted: Whether the run broke down
        reason: Abort reason
    """

    eps: float
    difference: float = float("nan")
    ratio: float = float("nan")
    b_deviation: float = float("nan")
    aborted: bool = False
    reason: str = ""


@dataclass
class LimitSweepResult:
    """
    Rows in the order of the requested eps list, and the shared step.

    reference_reason is set when the eps = 0 run itself aborted; the
    differences are then undefined and the rows carry NaN.
    """

    rows: List[LimitRow]
    dt: float
    fitted_c: float = float("nan")
    reference_reason: str = ""

    @property
    def reference_aborted(self) -> bool:
        return bool(self.reference_reason)

    @property
    def monotone(self) -> bool:
        """Whether the differences strictly decrease along decreasing eps > 0."""
        if self.reference_aborted:
            return False
        members = sorted((r for r in self.rows if r.eps > 0.0 and not r.aborted),
                         key=lambda r: r.eps, reverse=True)
        diffs = [r.difference for r in members]
        return all(a > b for a, b in zip(diffs, diffs[1:]))

    def b_within(self, eps: float, factor: float = 2.0) -> bool:
        """Whether |B - delta| at eps stays below factor * c eps^2."""
        for row in self.rows:
            if row.eps == eps and not row.aborted:
                return row.b_deviation <= factor * self.fitted_c * eps * eps
        raise InvalidInputError(f"No completed sweep member with eps = {eps}")


def _b_deviation(traj: Trajectory) -> float:
    out = 0.0
    for state in traj:
        defo = compute_deformation(state, traj.grid)
        coeffs = assemble_coefficients(state, defo, traj.weight, traj.params)
        delta = traj.grid.identity_tensor()
        out = max(out, float(np.max(np.abs(coeffs.B - delta))))
    return out


def limit_sweep(config: SolverConfig, eps_list: Sequence[float], workers: int = 1) -> LimitSweepResult:
    """
    Run the same initial data for each eps and compare with eps = 0.

    All members share one fixed step (the CFL step of the eps = 0 initial
    state unless config.dt is set) so cadence times coincide.

    Returns:
        LimitSweepResult; aborted members carry aborted=True, an aborted
        eps = 0 reference sets reference_reason

    Raises:
        InvalidInputError: If eps_list is empty or has negative entries
    """
    eps_values = [float(e) for e in eps_list]
    if not eps_values or any(e < 0.0 for e in eps_values):
        raise InvalidInputError(f"eps list must be nonempty and nonnegative: {eps_list}")
    base = replace(config, params=ThermoParams(config.params.gamma, 0.0), diagnostics=False,
                   show_progress=False)
    dt = config.dt if config.dt is not None else _integral_step(config.t_end, estimate_time_step(base))
    members = ([0.0] if 0.0 not in eps_values else []) + eps_values

    def run_member(eps: float):
        member = replace(base, params=ThermoParams(config.params.gamma, eps), dt=dt)
        try:
            return run(member)
        except SimulationAbortedError as e:
            logger.warning("sweep member eps=%g aborted at t=%s: %s", eps, e.time, e.reason)
            return e

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_member, members))
    else:
        outcomes = [run_member(e) for e in tqdm(members, desc="limit", disable=not config.show_progress)]
    results = dict(zip(members, outcomes))

    reference = results[0.0]
    reference_reason = ""
    if isinstance(reference, SimulationAbortedError):
        reference_reason = reference.reason or "aborted"

    rows = []
    for eps in eps_values:
        outcome = results[eps]
        if isinstance(outcome, SimulationAbortedError):
            rows.append(LimitRow(eps=eps, aborted=True, reason=outcome.reason))
            continue
        if reference_reason:
            rows.append(LimitRow(eps=eps, b_deviation=_b_deviation(outcome)))
            continue
        count = min(len(outcome), len(reference))
        diff = 0.0
        for k in range(count):
            diff = max(diff, float(np.max(np.abs(outcome[k].eta - reference[k].eta))))
        rows.append(LimitRow(eps=eps, difference=diff, b_deviation=_b_deviation(outcome)))

    ordered = sorted((r for r in rows if not r.aborted), key=lambda r: r.eps, reverse=True)
    for prev, row in zip(ordered, ordered[1:]):
        if row.difference > 0.0:
            row.ratio = prev.difference / row.difference

    fit = [r for r in rows if r.eps > 0.0 and not r.aborted]
    fitted = float("nan")
    if fit:
        e2 = np.array([r.eps ** 2 for r in fit])
        b = np.array([r.b_deviation for r in fit])
        fitted = float(np.sum(b * e2) / np.sum(e2 * e2))
    return LimitSweepResult(rows=rows, dt=dt, fitted_c=fitted, reference_reason=reference_reason)


@dataclass
class HalvingResult:
    """
    RK4 step-halving study.

    The integral of V J changes under the semi-discrete flow as well, by an
    amount that does not depend on dt. The step-dependent part of the drift
    is isolated by differencing consecutive levels.

    Attributes:
        dts: Step of each level
        eta_differences: max |eta_k(T) - eta_{k+1}(T)| between consecutive levels
        eta_ratios: Consecutive ratios of eta_differences (about 16 for RK4)
        drifts: Final relative drift of the integral of V J per level
        drift_differences: |drift_k - drift_{k+1}| between consecutive levels
        drift_ratios: Consecutive ratios of drift_differences (>= 16 for RK4)
        raw_drift_ratios: Consecutive ratios of |drifts|
    """

    dts: List[float]
    eta_differences: List[float]
    eta_ratios: List[float]
    drifts: List[float]
    drift_differences: List[float]
    drift_ratios: List[float]
    raw_drift_ratios: List[float]


def _ratios(values: Sequence[float]) -> List[float]:
    return [values[k] / values[k + 1] if values[k + 1] > 0.0 else float("inf")
            for k in range(len(values) - 1)]


def step_halving_study(config: SolverConfig, levels: int = 3) -> HalvingResult:
    """
    Rerun with dt, dt/2, ... and measure the self-convergence of eta and
    of the energy drift.

    Raises:
        InvalidInputError: For fewer than 3 levels or t_end = 0
    """
    if levels < 3:
        raise InvalidInputError(f"Step halving needs >= 3 levels, got {levels}")
    if config.t_end <= 0.0:
        raise InvalidInputError("Step halving needs t_end > 0")
    base = replace(config, diagnostics=False, show_progress=False, cadence=10 ** 9)
    dt0 = config.dt if config.dt is not None else estimate_time_step(base)
    dt0 = _integral_step(config.t_end, dt0)

    dts, finals, drifts = [], [], []
    for k in range(levels):
        dt = dt0 / 2 ** k
        traj = run(replace(base, dt=dt))
        dts.append(dt)
        finals.append(traj.final_state.eta)
        drifts.append(traj.monitor[-1].energy_drift)

    diffs = [float(np.max(np.abs(finals[k] - finals[k + 1]))) for k in range(levels - 1)]
    drift_diffs = [abs(drifts[k] - drifts[k + 1]) for k in range(levels - 1)]
    result = HalvingResult(dts=dts, eta_differences=diffs, eta_ratios=_ratios(diffs), drifts=drifts,
                           drift_differences=drift_diffs, drift_ratios=_ratios(drift_diffs),
                           raw_drift_ratios=_ratios([abs(d) for d in drifts]))
    logger.info("step halving: eta ratios %s, drift ratios %s (raw %s)", result.eta_ratios,
                result.drift_ratios, result.raw_drift_ratios)
    return result
