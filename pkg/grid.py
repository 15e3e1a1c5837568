#!/usr/bin/env python3
"""
Structured grid over the slab Omega = T^2 x (0, 1).

Axes 1 and 2 are periodic with n nodes of spacing 1/n (a single node
means planar symmetry: no dependence on that coordinate). Axis 3 has n3
nodes including both faces x3 = 0 and x3 = 1, spacing 1/(n3 - 1).

Field layout: scalars (n1, n2, n3), vectors (3, n1, n2, n3), tensors
(3, 3, n1, n2, n3) with T[i, j] = T^i_j. The grid axes are always the
last three.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate

from errors import InvalidInputError

MultiIndex = Tuple[Tuple[int, int], int]


@dataclass(frozen=True)
class GridSpec:
    """
    Node counts of the slab grid.

    Attributes:
        shape: (n1, n2, n3); n1 = n2 = 1 selects planar symmetry
    """

    shape: Tuple[int, int, int]

    def __post_init__(self):
        if len(self.shape) != 3:
            raise InvalidInputError(f"Grid shape needs 3 entries, got {self.shape}")
        n1, n2, n3 = self.shape
        if any(int(n) != n for n in self.shape):
            raise InvalidInputError(f"Grid node counts must be integers: {self.shape}")
        if n1 < 1 or n2 < 1:
            raise InvalidInputError(f"Periodic node counts must be >= 1: {self.shape}")
        if n3 < 3:
            raise InvalidInputError(f"n3 must be >= 3, got {n3}")
        object.__setattr__(self, "shape", (int(n1), int(n2), int(n3)))

    @classmethod
    def planar(cls, n3: int) -> "GridSpec":
        return cls((1, 1, n3))

    @property
    def n3(self) -> int:
        return self.shape[2]

    @property
    def spacing(self) -> Tuple[float, float, float]:
        """Per-axis node spacing (1/n1, 1/n2, 1/(n3 - 1))."""
        n1, n2, n3 = self.shape
        return (1.0 / n1, 1.0 / n2, 1.0 / (n3 - 1))

    @property
    def is_planar(self) -> bool:
        return self.shape[0] == 1 and self.shape[1] == 1

    @property
    def scalar_shape(self) -> Tuple[int, int, int]:
        return self.shape

    @property
    def vector_shape(self) -> Tuple[int, ...]:
        return (3,) + self.shape

    @property
    def tensor_shape(self) -> Tuple[int, ...]:
        return (3, 3) + self.shape

    @property
    def x3(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.shape[2])

    def axis_nodes(self, axis: int) -> np.ndarray:
        """1D node coordinates along axis 0, 1 or 2."""
        if axis == 2:
            return self.x3
        return np.arange(self.shape[axis]) / self.shape[axis]

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node coordinates (X1, X2, X3), each of shape scalar_shape."""
        return tuple(np.meshgrid(*(self.axis_nodes(a) for a in range(3)), indexing="ij"))

    def identity_map(self) -> np.ndarray:
        """The flow map eta = x as a vector field."""
        return np.stack(self.coordinates())

    def identity_tensor(self) -> np.ndarray:
        """delta^i_j at every node."""
        eye = np.eye(3).reshape(3, 3, 1, 1, 1)
        return np.array(np.broadcast_to(eye, self.tensor_shape))

    def interior(self) -> Tuple[slice, ...]:
        """Index of nodes with 0 < x3 < 1 (trailing grid axes)."""
        return (Ellipsis, slice(1, -1))

    def check_field(self, f: np.ndarray, rank: int, name: str = "field") -> None:
        """Raise InvalidInputError unless f has the rank-`rank` field shape."""
        expected = (3,) * rank + self.shape
        if np.shape(f) != expected:
            raise InvalidInputError(f"{name} has shape {np.shape(f)}, expected {expected}")

    # Stencils

    def derivative(self, f: np.ndarray, axis: int) -> np.ndarray:
        """
        First derivative along spatial axis 0, 1 or 2 (x1, x2, x3).

        Periodic axes use the centered 3-point stencil (identically zero on
        a single node). Axis 3 is centered in the interior and one-sided
        second order at the faces.
        """
        n = self.shape[axis]
        h = self.spacing[axis]
        array_axis = f.ndim - 3 + axis
        if axis == 2:
            return np.gradient(f, h, axis=array_axis, edge_order=2)
        if n == 1:
            return np.zeros_like(f)
        return (np.roll(f, -1, axis=array_axis) - np.roll(f, 1, axis=array_axis)) / (2.0 * h)

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """
        Gradient with the derivative direction appended as a new axis
        in front of the grid axes: G[..., s, :, :, :] = d_s f.

        For a vector F this gives G[i, s] = F^i,_s.
        """
        return np.stack([self.derivative(f, a) for a in range(3)], axis=f.ndim - 3)

    def flow_gradient(self, eta: np.ndarray) -> np.ndarray:
        """
        Deformation gradient D_eta[r, s] = d_s eta^r of a flow map.

        The displacement eta - x is differenced (it is periodic in x1, x2)
        and the identity added back.
        """
        return self.gradient(eta - self.identity_map()) + self.identity_tensor()

    def divergence_rows(self, T: np.ndarray) -> np.ndarray:
        """sum_k d_k T[k, ...] over the leading index."""
        return sum(self.derivative(T[k], k) for k in range(3))

    def check_order(self, m: Tuple[int, int], n: int) -> None:
        """
        Raise unless d_1^m1 d_2^m2 d_3^n fits the stencils.

        Repeated centered differences of order q need 2q + 1 nodes along
        the axis; tangential derivatives on a single node are exact zeros.
        """
        for axis, order in ((0, m[0]), (1, m[1]), (2, n)):
            count = self.shape[axis]
            if order < 0:
                raise InvalidInputError(f"Negative derivative order (m={m}, n={n})")
            if order and not (axis < 2 and count == 1) and count < 2 * order + 1:
                raise InvalidInputError(
                    f"Derivative (m={m}, n={n}) too high for {count} nodes along axis {axis + 1}"
                )

    def mixed_derivative(self, f: np.ndarray, m: Tuple[int, int], n: int) -> np.ndarray:
        """d_1^m1 d_2^m2 d_3^n f by repeated first-derivative stencils."""
        self.check_order(m, n)
        out = f
        for axis, order in ((0, m[0]), (1, m[1]), (2, n)):
            if order and axis < 2 and self.shape[axis] == 1:
                return np.zeros_like(f)
            for _ in range(order):
                out = self.derivative(out, axis)
        return out

    def mixed_derivative_of_map(self, eta: np.ndarray, m: Tuple[int, int], n: int) -> np.ndarray:
        """
        d_tau^m d_3^n of a flow map, treating the identity part exactly.

        First-order derivatives of x are unit vectors, higher ones vanish.
        """
        if m == (0, 0) and n == 0:
            return eta
        out = self.mixed_derivative(eta - self.identity_map(), m, n)
        orders = (m[0], m[1], n)
        if sum(orders) == 1:
            out = out.copy()
            out[orders.index(1)] += 1.0
        return out

    def multi_indices(self, order: int) -> List[MultiIndex]:
        """All ((m1, m2), n) with m1 + m2 + n <= order, in a fixed order."""
        out = []
        for total in range(order + 1):
            for n in range(total, -1, -1):
                rest = total - n
                for m1 in range(rest, -1, -1):
                    out.append(((m1, rest - m1), n))
        return out

    def is_tangential_zero(self, m: Tuple[int, int]) -> bool:
        """Whether d_tau^m vanishes identically on this grid."""
        return (m[0] > 0 and self.shape[0] == 1) or (m[1] > 0 and self.shape[1] == 1)

    # Quadrature

    def integrate(self, f: np.ndarray, rule: str = "trapezoid") -> np.ndarray:
        """
        Integral over Omega of the trailing grid axes.

        Periodic axes use the rectangle rule (exact for trigonometric
        polynomials); axis 3 uses the trapezoid or Simpson rule.
        """
        mean = np.mean(f, axis=(-3, -2))
        if rule == "trapezoid":
            return integrate.trapezoid(mean, dx=self.spacing[2], axis=-1)
        if rule == "simpson":
            return integrate.simpson(mean, dx=self.spacing[2], axis=-1)
        raise InvalidInputError(f"Unknown quadrature rule '{rule}'")

    def refine(self, factor: int = 2) -> "GridSpec":
        """Grid with all spacings divided by factor."""
        n1, n2, n3 = self.shape
        scale = lambda n: n if n == 1 else n * factor
        return GridSpec((scale(n1), scale(n2), (n3 - 1) * factor + 1))


def frobenius_sq(T: np.ndarray) -> np.ndarray:
    """Nodewise sum of squares over the leading tensor indices."""
    return np.sum(T * T, axis=tuple(range(T.ndim - 3)))


def refinement_order(h: Sequence[float], errors: Sequence[float]) -> float:
    """
    Least-squares slope of log(error) against log(h).

    Raises:
        InvalidInputError: With fewer than two points or nonpositive errors
    """
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.size < 2 or h.size != e.size:
        raise InvalidInputError("Refinement study needs at least two (h, error) pairs")
    if np.any(e <= 0.0) or not np.all(np.isfinite(e)):
        raise InvalidInputError(f"Errors must be positive and finite: {e}")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def pairwise_orders(h: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Observed order between consecutive refinement levels."""
    out = []
    for k in range(len(errors) - 1):
        out.append(float(np.log(errors[k] / errors[k + 1]) / np.log(h[k] / h[k + 1])))
    return out

