#!/usr/bin/env python3
"""
Tests for the check registry and the result tables.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from console import Console
from solver import LimitRow, LimitSweepResult
from trajectory import Event
from verification import CHECKS, CheckResult, check_planar_irrotational, get_check, list_checks, run_checks

QUICK_CHECKS = (
    "curl-norm-identity",
    "curl-of-gradient",
    "newtonian-coefficients",
    "rest-state-structure",
    "hardy-exact",
    "hardy-family",
    "structure-identity-forms",
    "density-consistency",
    "g0-defect",
    "energy-identity-values",
)


def test_list_checks():
    """Test that every check has a description."""
    names = list_checks()
    assert "piola-order" in names
    assert "planar-irrotational" in names
    assert len(names) == len(set(names))
    for name in names:
        description, function = CHECKS[name]
        assert description
        assert callable(function)


def test_get_check_invalid():
    """Test getting an unknown check."""
    try:
        get_check("no-such-check")
        assert False, "Should have raised ValueError"
    except ValueError as e:
        assert "Unknown check" in str(e)
        assert "piola-order" in str(e)


def test_quick_checks_pass():
    """Test that the fast checks pass."""
    results = run_checks(QUICK_CHECKS)
    assert [r.name for r in results] == list(QUICK_CHECKS)
    for result in results:
        assert result.passed, f"{result.name}: {result.value} ({result.detail})"


def test_raising_check_is_recorded(monkeypatch):
    """Test that an exception inside a check becomes a failed result."""
    def broken():
        raise RuntimeError("boom")

    monkeypatch.setitem(CHECKS, "broken", ("always raises", broken))
    result = run_checks(["broken"])[0]
    assert not result.passed
    assert "RuntimeError" in result.detail


@pytest.mark.slow
def test_all_checks_pass():
    """Test the full suite."""
    failed = [r.name for r in run_checks() if not r.passed]
    assert failed == []


@pytest.mark.slow
def test_planar_irrotational_to_half():
    """Test that irrotational data keep Curl chi below 1e-8 up to t = 0.5."""
    result = check_planar_irrotational()
    assert result.passed, f"{result.value} ({result.detail})"
    assert result.detail.endswith("t = 0.5")


def test_check_table():
    """Test the plain-text check table."""
    console = Console(use_color=False)
    table = console.check_table([
        CheckResult("a", True, 1e-13, "<= 1e-12"),
        CheckResult("b", False, 0.5, "<= 0.1", "too big"),
    ])
    assert "PASS" in table
    assert "FAIL" in table
    assert "1/2 checks passed" in table
    assert "\x1b[" not in table


def test_colored_status():
    """Test that colours wrap the status tag."""
    console = Console(use_color=True)
    assert console.status(True).startswith("\x1b[")
    assert "PASS" in console.status(True)


def test_limit_table():
    """Test the sweep table with an aborted member."""
    result = LimitSweepResult(rows=[LimitRow(eps=0.2, difference=1e-3, ratio=4.0, b_deviation=0.01),
                                    LimitRow(eps=0.1, aborted=True, reason="superluminal")],
                              dt=0.005, fitted_c=0.25)
    table = Console(use_color=False).limit_table(result)
    assert "aborted" in table
    assert "superluminal" in table
    assert "Monotone decrease: PASS" in table
    assert "Fitted c" in table
    assert "Reference eps = 0 aborted" not in table
    result.reference_reason = "degenerate"
    table = Console(use_color=False).limit_table(result)
    assert "Reference eps = 0 aborted: degenerate" in table
    assert "Monotone decrease: FAIL" in table


def test_events_text():
    """Test the monitor event listing."""
    console = Console(use_color=False)
    assert console.events([]) == "No monitor events"
    text = console.events([Event("majorant", 0.25, "rate above bound")])
    assert "[majorant]" in text
    assert "t=0.25" in text


def test_number_format():
    """Test number cells."""
    assert Console.number(None) == "-"
    assert Console.number(float("nan")) == "nan"
    assert Console.number(0.5) == "5.0000e-01"


if __name__ == "__main__":
    test_list_checks()
    test_get_check_invalid()
    test_quick_checks_pass()
    test_all_checks_pass()
    test_planar_irrotational_to_half()
    test_check_table()
    test_colored_status()
    test_limit_table()
    test_events_text()
    test_number_format()
    print("All tests passed!")
