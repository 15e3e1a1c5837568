#!/usr/bin/env python3
"""
Stored solver output: states at cadence points with their diagnostics.
"""

from dataclasses import asdict, dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from config import CSV_COLUMNS
from eos import ThermoParams
from errors import InvalidInputError
from grid import GridSpec
from kinematics import FlowState


@dataclass
class MonitorRow:
    """
    Conserved-quantity log entry at one cadence point.

    Attributes:
        t: Time
        g0_defect: max |N Gamma J - w^alpha| with N re-derived through the EOS
        energy_drift: Relative drift of int V J dx (eps > 0) or of the
            Lagrangian energy (eps = 0)
        lagrangian_drift: Relative drift of the Lagrangian energy
        chi_h_res: max |Gamma d_t chi + A D h|
        min_J: Smallest Jacobian
        max_eps_v: Largest eps |v|
    """

    t: float
    g0_defect: float
    energy_drift: float
    lagrangian_drift: float
    chi_h_res: float
    min_J: float
    max_eps_v: float


@dataclass
class Event:
    """Monitor event (bound violation, bracket exit)."""

    kind: str
    time: float
    message: str


class Trajectory:
    """
    Time-stamped FlowStates with their energy reports and monitor rows.
    """

    def __init__(self, grid: GridSpec, params: ThermoParams, weight=None,
                 header: Optional[dict] = None):
        """
        Initialize an empty trajectory.

        Args:
            grid: Grid of every stored state
            params: Gas parameters of the run
            weight: WeightField of the run
            header: Free-form run description (weight, initial data)
        """
        self._grid = grid
        self._params = params
        self._weight = weight
        self._header = dict(header or {})
        self._states: List[FlowState] = []
        self._reports = []
        self._monitor: List[MonitorRow] = []
        self._events: List[Event] = []
        self._steps = 0

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def params(self) -> ThermoParams:
        return self._params

    @property
    def weight(self):
        return self._weight

    @property
    def header(self) -> dict:
        return self._header

    @property
    def times(self) -> np.ndarray:
        """Time stamps of the stored states."""
        return np.array([s.time for s in self._states])

    @property
    def reports(self) -> list:
        return self._reports

    @property
    def monitor(self) -> List[MonitorRow]:
        return self._monitor

    @property
    def events(self) -> List[Event]:
        return self._events

    @property
    def steps(self) -> int:
        """Accepted time steps of the run."""
        return self._steps

    @steps.setter
    def steps(self, value: int) -> None:
        self._steps = int(value)

    @property
    def final_state(self) -> FlowState:
        if not self._states:
            raise InvalidInputError("Trajectory is empty")
        return self._states[-1]

    def append(self, state: FlowState, report=None, monitor: Optional[MonitorRow] = None) -> None:
        """
        Store a state.

        Raises:
            InvalidInputError: If the time does not increase or the shape
                does not match the grid
        """
        self._grid.check_field(state.eta, 1, "eta")
        if self._states and not state.time > self._states[-1].time:
            raise InvalidInputError(
                f"Trajectory times must increase: {self._states[-1].time} -> {state.time}"
            )
        self._states.append(state)
        self._reports.append(report)
        if monitor is not None:
            self._monitor.append(monitor)

    def add_event(self, kind: str, time: float, message: str) -> None:
        self._events.append(Event(kind=kind, time=float(time), message=message))

    def get_state(self, index: Optional[int] = None) -> FlowState:
        """
        Get a stored state.

        Args:
            index: Position in the trajectory (None = last)
        """
        if not self._states:
            raise InvalidInputError("Trajectory is empty")
        return self._states[-1 if index is None else index]

    def get_states(self, skip: int = 0) -> Iterator[Tuple[int, FlowState]]:
        """
        Iterate through stored states.

        Args:
            skip: Number of states to skip between yields (0 = all)

        Yields:
            Tuple of (index, state)
        """
        for index, state in enumerate(self._states):
            if skip > 0 and index % (skip + 1) != 0:
                continue
            yield index, state

    def rows(self) -> List[dict]:
        """One CSV row per cadence point, keyed by CSV_COLUMNS."""
        out = []
        for k, state in enumerate(self._states):
            report = self._reports[k]
            row = {name: float("nan") for name in CSV_COLUMNS}
            row["t"] = state.time
            if report is not None:
                row.update(report.summary())
            if k < len(self._monitor):
                entry = asdict(self._monitor[k])
                row.update({name: entry[name] for name in CSV_COLUMNS if name in entry and name != "t"})
            out.append({name: row[name] for name in CSV_COLUMNS})
        return out

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[FlowState]:
        return iter(self._states)

    def __getitem__(self, index: int) -> FlowState:
        return self._states[index]
