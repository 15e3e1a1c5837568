#!/usr/bin/env python3
"""
Manufactured solutions for the planar solver.

For a prescribed flow map eta(t, x) the body force that makes it exact is
assembled symbolically in the same w^alpha-cancelled form the solver uses:

    f^j = B^j_i d_t^2 eta^i + w C^k_ij d_k d_t eta^i
          + (1 + a) (d_k w) A^k_j J^(-1/a) + w d_k(A^k_j J^(-1/a))
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Sequence

import numpy as np
import sympy as sy
from tqdm import tqdm

from eos import ThermoParams
from errors import InvalidInputError
from expressions import SPACE_SYMBOLS, ExpressionLike, parse_expression, parse_vector, t
from grid import GridSpec, pairwise_orders, refinement_order
from solver import Problem, SolverConfig, run

logger = logging.getLogger(__name__)


def mms_forcing(exact: Sequence[ExpressionLike], weight_expression: ExpressionLike,
                params: ThermoParams) -> List[sy.Expr]:
    """
    Symbolic body force making `exact` a solution.

    Args:
        exact: Flow map components in x1, x2, x3, t
        weight_expression: Weight w(x)
        params: Gas parameters

    Returns:
        Three sympy expressions in x1, x2, x3, t
    """
    eta = sy.Matrix(parse_vector(exact, allow_time=True))
    w = parse_expression(weight_expression)
    X = sy.Matrix(SPACE_SYMBOLS)
    alpha = sy.nsimplify(params.alpha)
    e2 = sy.nsimplify(params.eps2)

    M = eta.jacobian(X)
    J = M.det()
    A = M.adjugate() / J
    v = eta.diff(t)
    a = v.diff(t)
    Jf = J ** (-1 / alpha)
    P = A * Jf  # P[k, j] = A^k_j J^(-1/a)

    forcing = []
    if e2 == 0:
        B = sy.eye(3)
        C_term = [0, 0, 0]
    else:
        q = (v.T * v)[0, 0]
        Gamma = 1 / sy.sqrt(1 - e2 * q)
        h = (1 + alpha) * w * (Gamma * J) ** (-1 / alpha)
        e2h = e2 * h
        B = ((1 + e2h) * sy.eye(3)
             + (1 + (1 - 1 / alpha) * e2h) * e2 * Gamma ** 2 * (v * v.T)) * Gamma ** (2 + 1 / alpha)
        coef = -(1 + 1 / alpha) * e2 * Gamma ** 2 * Jf
        C_term = []
        for j in range(3):
            total = 0
            for k in range(3):
                for i in range(3):
                    total += coef * (A[k, i] * v[j] + A[k, j] * v[i]) * sy.diff(v[i], X[k])
            C_term.append(total)

    for j in range(3):
        inertia = sum(B[j, i] * a[i] for i in range(3))
        pressure = sum((1 + alpha) * sy.diff(w, X[k]) * P[k, j] + w * sy.diff(P[k, j], X[k])
                       for k in range(3))
        forcing.append(inertia + w * C_term[j] + pressure)
    return forcing


@dataclass
class MMSResult:
    """
    Convergence study against a manufactured solution.

    Attributes:
        n3: Normal node counts
        h: Normal spacings
        errors: max-node |eta - eta_exact| at t_end per grid
    """

    n3: List[int]
    h: List[float]
    errors: List[float]

    @property
    def order(self) -> float:
        """Least-squares observed order."""
        return refinement_order(self.h, self.errors)

    @property
    def pairwise(self) -> List[float]:
        return pairwise_orders(self.h, self.errors)


def with_forcing(config: SolverConfig) -> SolverConfig:
    """Attach the manufactured forcing of config.exact to a config."""
    if config.exact is None:
        raise InvalidInputError("Manufactured forcing needs an exact solution")
    base = Problem(replace(config, forcing=None))
    forcing = mms_forcing(config.exact, base.weight.expression, config.params)
    return replace(config, forcing=forcing)


def mms_study(config: SolverConfig, grids: Sequence[int]) -> MMSResult:
    """
    Run the manufactured problem on each planar grid and measure the error.

    Args:
        config: Config with `exact` set (forcing is derived if absent)
        grids: Normal node counts n3, increasing

    Raises:
        InvalidInputError: With fewer than two grids or no exact solution
    """
    if len(grids) < 2:
        raise InvalidInputError(f"Convergence study needs >= 2 grids, got {len(grids)}")
    if config.exact is None:
        raise InvalidInputError("Convergence study needs an exact solution")
    if config.forcing is None:
        config = with_forcing(config)

    n3s, hs, errors = [], [], []
    for n3 in tqdm(grids, desc="mms", disable=not config.show_progress):
        grid = GridSpec.planar(int(n3))
        member = replace(config, grid=grid, diagnostics=False, show_progress=False, cadence=10 ** 9)
        traj = run(member)
        exact = Problem(member).exact(traj.final_state.time)
        error = float(np.max(np.abs(traj.final_state.eta - exact)))
        logger.info("mms n3=%d: error %.3e", n3, error)
        n3s.append(int(n3))
        hs.append(grid.spacing[2])
        errors.append(error)
    result = MMSResult(n3=n3s, h=hs, errors=errors)
    if all(e > 0.0 and math.isfinite(e) for e in errors):
        logger.info("mms observed order %.3f", result.order)
    return result
