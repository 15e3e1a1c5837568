#!/usr/bin/env python3
"""
Degenerate weight w and its regularity functionals.

The weight vanishes on the faces x3 = 0, 1 like the distance function
d(x) = min(x3, 1 - x3): C_lo d <= w <= C_hi d. All derivatives of w are
analytic closures of the profile expression, sampled on the grid.
"""

import logging
from typing import Dict, Optional, Tuple

import numpy as np
import sympy as sy

from config import BOUNDARY_TOL, DEFAULT_PROFILE, MAX_WEIGHT_ORDER
from errors import InvalidInputError, InvalidWeightError
from expressions import SPACE_SYMBOLS, parse_expression, sample
from grid import GridSpec
from profiles import get_profile

logger = logging.getLogger(__name__)

CUSTOM_PROFILE = "custom-expression"


class WeightField:
    """
    Weight samples with analytic derivative closures.

    Derivatives are computed symbolically on first use and cached.
    Construction does not validate; use make_weight for that.
    """

    def __init__(self, expression, grid: GridSpec, max_order: int = MAX_WEIGHT_ORDER,
                 name: str = "custom"):
        """
        Initialize weight field.

        Args:
            expression: Sympy expression or expression string in x1, x2, x3
            grid: Grid to sample on
            max_order: Highest derivative order available
            name: Profile name, for headers and logs
        """
        self._expr = parse_expression(expression)
        self._grid = grid
        self._max_order = int(max_order)
        self._name = name
        self._cache: Dict[Tuple[int, int, int], np.ndarray] = {}
        self._bounds: Optional[Tuple[float, float]] = None
        self._w = self.derivative((0, 0), 0)

    @property
    def w(self) -> np.ndarray:
        """Weight samples."""
        return self._w

    @property
    def grad_w(self) -> np.ndarray:
        """(d_1 w, d_2 w, d_3 w) as a vector field."""
        return np.stack([self.derivative((1, 0), 0),
                         self.derivative((0, 1), 0),
                         self.derivative((0, 0), 1)])

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def expression(self) -> sy.Expr:
        return self._expr

    @property
    def name(self) -> str:
        return self._name

    @property
    def max_order(self) -> int:
        return self._max_order

    @property
    def is_tangentially_constant(self) -> bool:
        """Whether w depends on x3 only."""
        return not ({SPACE_SYMBOLS[0], SPACE_SYMBOLS[1]} & self._expr.free_symbols)

    def derivative(self, m: Tuple[int, int], n: int) -> np.ndarray:
        """
        Sampled d_1^m1 d_2^m2 d_3^n w.

        Raises:
            InvalidInputError: If the order exceeds max_order
        """
        key = (int(m[0]), int(m[1]), int(n))
        if min(key) < 0 or sum(key) > self._max_order:
            raise InvalidInputError(
                f"Weight derivative (m={m}, n={n}) exceeds available order {self._max_order}"
            )
        if key not in self._cache:
            expr = self._expr
            for symbol, order in zip(SPACE_SYMBOLS, key):
                if order:
                    expr = sy.diff(expr, symbol, order)
            values = np.zeros(self._grid.scalar_shape) if expr == 0 else sample(expr, self._grid)
            values.setflags(write=False)
            self._cache[key] = values
        return self._cache[key]

    def power(self, exponent: float) -> np.ndarray:
        """w^exponent with 0^exponent = 0 for exponent > 0."""
        return np.power(np.maximum(self._w, 0.0), exponent)

    @property
    def comparability(self) -> Tuple[float, float]:
        """
        Bounds (C_lo, C_hi) with C_lo d <= w <= C_hi d.

        Taken over the interior node ratios w/d together with the
        inward face slopes, which are the limits of w/d at the faces.
        """
        if self._bounds is None:
            x3 = self._grid.x3
            d = np.minimum(x3, 1.0 - x3)[1:-1]
            ratio = self._w[..., 1:-1] / d
            d3w = self.derivative((0, 0), 1)
            slopes = np.concatenate([d3w[..., 0].ravel(), -d3w[..., -1].ravel()])
            values = np.concatenate([ratio.ravel(), slopes])
            self._bounds = (float(values.min()), float(values.max()))
        return self._bounds

    def validate(self) -> None:
        """
        Check the distance-comparable class.

        Raises:
            InvalidWeightError: If w does not vanish on the faces, is not
                positive inside, or degenerates faster than the distance
        """
        faces = np.concatenate([self._w[..., 0].ravel(), self._w[..., -1].ravel()])
        if np.max(np.abs(faces)) > BOUNDARY_TOL:
            raise InvalidWeightError(
                f"Weight '{self._name}' does not vanish on the boundary (max |w| = {np.max(np.abs(faces)):.3e})"
            )
        if np.any(~(self._w[..., 1:-1] > 0.0)):
            raise InvalidWeightError(f"Weight '{self._name}' is not positive in the interior")
        lo, hi = self.comparability
        if not (lo > BOUNDARY_TOL and np.isfinite(hi)):
            raise InvalidWeightError(
                f"Weight '{self._name}' is not comparable to the distance function "
                f"(C_lo = {lo:.3e}, C_hi = {hi:.3e})"
            )

    def header(self) -> dict:
        """Serializable description for output headers."""
        return {"profile": self._name, "expression": str(self._expr), "max_order": self._max_order}


def make_weight(profile: str = DEFAULT_PROFILE, grid: GridSpec = None,
                expression: Optional[str] = None,
                max_order: int = MAX_WEIGHT_ORDER) -> WeightField:
    """
    Construct and validate a weight.

    Args:
        profile: A registered profile name or "custom-expression"
        grid: Grid to sample on
        expression: Expression string for custom profiles
        max_order: Highest derivative order kept

    Returns:
        A validated WeightField

    Raises:
        InvalidWeightError: If the profile fails validation
        InvalidInputError: If the profile or expression is malformed
    """
    if grid is None:
        raise InvalidInputError("make_weight needs a grid")
    if profile == CUSTOM_PROFILE:
        if expression is None:
            raise InvalidInputError("Custom weight profile needs an expression")
        text = expression
    else:
        try:
            text = get_profile(profile)
        except ValueError as e:
            raise InvalidInputError(str(e)) from e

    weight = WeightField(text, grid, max_order=max_order, name=profile)
    weight.validate()
    logger.debug("weight '%s' = %s, comparability %s", profile, weight.expression,
                 weight.comparability)
    return weight


def weight_norms(weight: WeightField, M: int, alpha: float) -> Tuple[float, float]:
    """
    Regularity functionals of the weight.

        F_M     = sum_{|m|+n<=M} int w^(alpha+n+1) |d_tau^m d_3^n w|^2
        F_M^(I) = sum_{|m|+n<=M} int w^(alpha+n+1) |D d_tau^m d_3^n w|^2

    Trapezoid quadrature on the grid.

    Raises:
        InvalidInputError: If M + 1 exceeds the available derivative order
    """
    if M < 0 or M + 1 > weight.max_order:
        raise InvalidInputError(
            f"weight_norms order M={M} needs derivatives to {M + 1}, available {weight.max_order}"
        )
    grid = weight.grid
    F = 0.0
    F_I = 0.0
    for m, n in grid.multi_indices(M):
        factor = weight.power(alpha + n + 1)
        dw = weight.derivative(m, n)
        F += float(grid.integrate(factor * dw * dw))
        grad = (weight.derivative((m[0] + 1, m[1]), n),
                weight.derivative((m[0], m[1] + 1), n),
                weight.derivative(m, n + 1))
        F_I += float(grid.integrate(factor * sum(g * g for g in grad)))
    return F, F_I
