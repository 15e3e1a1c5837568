#!/usr/bin/env python3
"""
Tests for the stored trajectory.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from config import CSV_COLUMNS
from eos import ThermoParams
from errors import InvalidInputError
from grid import GridSpec
from kinematics import FlowState, identity_state
from trajectory import MonitorRow, Trajectory


def _state(grid, t):
    eta = grid.identity_map()
    return FlowState(eta=eta, eta_t=np.zeros_like(eta), time=t)


def _row(t):
    return MonitorRow(t=t, g0_defect=1e-14, energy_drift=2e-9, lagrangian_drift=3e-9,
                      chi_h_res=1e-5, min_J=0.98, max_eps_v=0.1)


def test_append_and_access():
    """Test storing and retrieving states."""
    grid = GridSpec.planar(9)
    traj = Trajectory(grid, ThermoParams(2.0, 0.1), header={"preset": "outflow"})
    for t in (0.0, 0.1, 0.2):
        traj.append(_state(grid, t))
    assert len(traj) == 3
    assert np.allclose(traj.times, [0.0, 0.1, 0.2])
    assert traj.final_state.time == 0.2
    assert traj.get_state(0).time == 0.0
    assert traj.get_state().time == 0.2
    assert traj[1].time == 0.1
    assert traj.header["preset"] == "outflow"


def test_times_must_increase():
    """Test that a repeated or earlier time is refused."""
    grid = GridSpec.planar(9)
    traj = Trajectory(grid, ThermoParams(2.0, 0.0))
    traj.append(_state(grid, 0.5))
    with pytest.raises(InvalidInputError):
        traj.append(_state(grid, 0.5))
    with pytest.raises(InvalidInputError):
        traj.append(_state(grid, 0.1))


def test_shape_must_match_grid():
    """Test that a state from another grid is refused."""
    traj = Trajectory(GridSpec.planar(9), ThermoParams(2.0, 0.0))
    with pytest.raises(InvalidInputError):
        traj.append(identity_state(GridSpec.planar(11)))


def test_empty_trajectory():
    """Test access on an empty trajectory."""
    traj = Trajectory(GridSpec.planar(9), ThermoParams(2.0, 0.0))
    assert len(traj) == 0
    with pytest.raises(InvalidInputError):
        traj.final_state
    with pytest.raises(InvalidInputError):
        traj.get_state()


def test_get_states_skip():
    """Test iterating with a skip."""
    grid = GridSpec.planar(9)
    traj = Trajectory(grid, ThermoParams(2.0, 0.0))
    for k in range(7):
        traj.append(_state(grid, 0.1 * k))
    assert [i for i, _ in traj.get_states()] == list(range(7))
    assert [i for i, _ in traj.get_states(skip=2)] == [0, 3, 6]


def test_rows_fill_missing_values():
    """Test that CSV rows use NaN where nothing was recorded."""
    grid = GridSpec.planar(9)
    traj = Trajectory(grid, ThermoParams(2.0, 0.0))
    traj.append(_state(grid, 0.0), monitor=_row(0.0))
    traj.append(_state(grid, 0.1))
    rows = traj.rows()
    assert len(rows) == 2
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["energy_drift"] == 2e-9
    assert math.isnan(rows[0]["E_total"])
    assert rows[1]["t"] == 0.1
    assert math.isnan(rows[1]["min_J"])


def test_events_and_steps():
    """Test events and the step counter."""
    traj = Trajectory(GridSpec.planar(9), ThermoParams(2.0, 0.0))
    traj.add_event("majorant", 0.3, "dE/dt above majorant")
    traj.steps = 12
    assert traj.events[0].kind == "majorant"
    assert traj.events[0].time == 0.3
    assert traj.steps == 12


if __name__ == "__main__":
    test_append_and_access()
    test_times_must_increase()
    test_shape_must_match_grid()
    test_empty_trajectory()
    test_get_states_skip()
    test_rows_fill_missing_values()
    test_events_and_steps()
    print("All tests passed!")
