#!/usr/bin/env python3
"""
Exception hierarchy.

Every error derives from ValueError so existing ``except ValueError``
handlers keep working.
"""

from typing import List, Optional, Tuple


class VacuumFlowError(ValueError):
    """Base class for all simulator errors."""


class InvalidInputError(VacuumFlowError):
    """Malformed arguments: shapes, orders, sampling, missing fields."""


class DomainError(VacuumFlowError):
    """Quantity undefined at the given state (vacuum, nonpositive density)."""


class SuperluminalError(DomainError):
    """
    Velocity at or above the light speed 1/eps.

    Attributes:
        node: Grid index of the first offending node (None for scalars)
        value: The offending eps*|v|
    """

    def __init__(self, message: str, node: Optional[Tuple[int, ...]] = None,
                 value: Optional[float] = None):
        super().__init__(message)
        self.node = node
        self.value = value


class DegenerateMapError(VacuumFlowError):
    """
    Flow map with nonpositive Jacobian.

    Attributes:
        node: Grid index of the first node with J <= 0
    """

    def __init__(self, message: str, node: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.node = node


class InvalidWeightError(VacuumFlowError):
    """Weight profile outside the distance-comparable class."""


class UnsupportedExponentError(VacuumFlowError):
    """Hardy exponent k = 1 has no inequality of the supported form."""


class SimulationAbortedError(VacuumFlowError):
    """
    Time integration stopped at a breakdown state.

    Attributes:
        state: Last valid FlowState
        time: Time of the last valid state
        reason: Short description of the breakdown
    """

    def __init__(self, message: str, state=None, time: Optional[float] = None,
                 reason: str = ""):
        super().__init__(message)
        self.state = state
        self.time = time
        self.reason = reason


class ConfigError(VacuumFlowError):
    """
    Malformed run configuration.

    Attributes:
        diagnostics: List of (location, message) pairs, location being
            "line L, column C" for syntax errors or a dotted key path
    """

    def __init__(self, message: str, diagnostics: Optional[List[Tuple[str, str]]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        lines = [f"  {loc}: {msg}" for loc, msg in self.diagnostics]
        return base + "\n" + "\n".join(lines)
