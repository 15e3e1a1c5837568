#!/usr/bin/env python3
"""
Closed-form expression strings for weights, initial data and forcing.

Expressions use the symbols x1, x2, x3 (and t where time is allowed),
the operators + - * / ^ and the functions sin, cos, exp; ``pi`` and
``sqrt`` are accepted as well. Strings are screened against this
vocabulary before sympy sees them.
"""

import re
from typing import Dict, List, Sequence, Union

import numpy as np
import sympy as sy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from errors import InvalidInputError

x1, x2, x3, t = sy.symbols("x1 x2 x3 t", real=True)
SPACE_SYMBOLS = (x1, x2, x3)

_FUNCTIONS = {
    "sin": sy.sin,
    "cos": sy.cos,
    "exp": sy.exp,
    "sqrt": sy.sqrt,
    "pi": sy.pi,
}
_ALLOWED_CHARS = re.compile(r"^[0-9A-Za-z_.+\-*/^()\s]*$")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TRANSFORMS = standard_transformations + (convert_xor,)

ExpressionLike = Union[str, int, float, sy.Expr]


def parse_expression(text: ExpressionLike, allow_time: bool = False) -> sy.Expr:
    """
    Parse an expression string into a sympy expression.

    Args:
        text: Expression string, number, or an existing sympy expression
        allow_time: Whether the symbol ``t`` may appear

    Returns:
        The parsed sympy expression

    Raises:
        InvalidInputError: If the string uses characters, names or
            symbols outside the accepted vocabulary, or fails to parse
    """
    if isinstance(text, sy.Expr):
        expr = text
    elif isinstance(text, (int, float)) and not isinstance(text, bool):
        if not np.isfinite(text):
            raise InvalidInputError(f"Non-finite constant in expression: {text}")
        expr = sy.Float(text) if isinstance(text, float) else sy.Integer(text)
    elif isinstance(text, str):
        expr = _parse_string(text, allow_time)
    else:
        raise InvalidInputError(f"Cannot interpret {text!r} as an expression")

    allowed = set(SPACE_SYMBOLS) | ({t} if allow_time else set())
    unknown = expr.free_symbols - allowed
    if unknown:
        names = ", ".join(sorted(str(s) for s in unknown))
        raise InvalidInputError(f"Unknown symbols in expression '{text}': {names}")
    return expr


def _parse_string(text: str, allow_time: bool) -> sy.Expr:
    if not text.strip():
        raise InvalidInputError("Empty expression")
    if not _ALLOWED_CHARS.match(text):
        raise InvalidInputError(f"Illegal characters in expression '{text}'")

    local: Dict[str, object] = {"x1": x1, "x2": x2, "x3": x3}
    if allow_time:
        local["t"] = t
    local.update(_FUNCTIONS)
    for name in _IDENTIFIER.findall(text):
        if name not in local:
            raise InvalidInputError(f"Unknown name '{name}' in expression '{text}'")

    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, ValueError, sy.SympifyError) as e:
        raise InvalidInputError(f"Cannot parse expression '{text}': {e}") from e
    if not isinstance(expr, sy.Expr):
        raise InvalidInputError(f"Expression '{text}' is not a scalar expression")
    return expr


def parse_vector(texts: Sequence[ExpressionLike], allow_time: bool = False) -> List[sy.Expr]:
    """Parse exactly three component expressions."""
    if len(texts) != 3:
        raise InvalidInputError(f"Vector expression needs 3 components, got {len(texts)}")
    return [parse_expression(s, allow_time=allow_time) for s in texts]


def sample(expr: sy.Expr, grid, time: float = 0.0) -> np.ndarray:
    """
    Evaluate an expression at every grid node.

    Args:
        expr: Sympy expression in x1, x2, x3 (and t)
        grid: GridSpec to sample on
        time: Value substituted for t

    Returns:
        Float array of shape grid.scalar_shape
    """
    fn = sy.lambdify((x1, x2, x3, t), expr, modules="numpy")
    X1, X2, X3 = grid.coordinates()
    values = np.asarray(fn(X1, X2, X3, time), dtype=float)
    return np.array(np.broadcast_to(values, grid.scalar_shape), dtype=float)


def sample_vector(exprs: Sequence[sy.Expr], grid, time: float = 0.0) -> np.ndarray:
    """Sample three component expressions into a (3, n1, n2, n3) array."""
    return np.stack([sample(e, grid, time) for e in exprs])


def field_function(exprs: Sequence[sy.Expr], grid):
    """
    Build a fast time-dependent sampler for a vector expression.

    Returns:
        Callable ``f(time) -> (3, n1, n2, n3) array``
    """
    fns = [sy.lambdify((x1, x2, x3, t), e, modules="numpy") for e in exprs]
    X1, X2, X3 = grid.coordinates()

    def evaluate(time: float) -> np.ndarray:
        out = np.empty((3,) + grid.scalar_shape)
        for i, fn in enumerate(fns):
            out[i] = np.broadcast_to(np.asarray(fn(X1, X2, X3, time), dtype=float),
                                     grid.scalar_shape)
        return out

    return evaluate
