#!/usr/bin/env python3
"""
Tests for the command-line entry point and its exit codes.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import json
import tempfile
from pathlib import Path

from cli_io import read_checkpoint, read_energy_csv
from config import OUTPUT_DIR_ENV
from main import build_parser, cli


def _write(directory, name, payload):
    path = Path(directory) / name
    text = payload if isinstance(payload, str) else json.dumps(payload)
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parser_requires_command():
    """Test that a missing subcommand is a usage error."""
    assert cli([]) == 2
    assert cli(["frobnicate"]) == 2


def test_parser_flags():
    """Test global flags and subcommand options."""
    args = build_parser().parse_args(["-vv", "--seed", "4", "--no-color", "limit", "--eps", "0.2", "0.1"])
    assert args.verbose == 2
    assert args.seed == 4
    assert not args.color
    assert args.eps == [0.2, 0.1]


def test_verify_list():
    """Test listing the checks."""
    assert cli(["--no-color", "verify", "--list"]) == 0


def test_verify_single_check():
    """Test running one check."""
    assert cli(["--no-color", "verify", "--only", "hardy-exact"]) == 0


def test_verify_unknown_check():
    """Test that an unknown check name is a usage error."""
    assert cli(["--no-color", "verify", "--only", "nope"]) == 2


def test_verify_checks_from_config():
    """Test selecting checks through the run configuration."""
    with tempfile.TemporaryDirectory() as tmp:
        config = _write(tmp, "verify.json", {"checks": ["hardy-exact", "density-consistency"]})
        assert cli(["--no-color", "verify", "--config", config]) == 0
        config = _write(tmp, "unknown.json", {"checks": ["nope"]})
        assert cli(["--no-color", "verify", "--config", config]) == 2


def test_bad_config_exit_code():
    """Test that malformed and invalid configs exit with 2."""
    with tempfile.TemporaryDirectory() as tmp:
        broken = _write(tmp, "broken.json", '{"gamma": ')
        invalid = _write(tmp, "invalid.json", {"cfl": 3.0})
        assert cli(["--no-color", "simulate", "--config", broken]) == 2
        assert cli(["--no-color", "simulate", "--config", invalid]) == 2
        assert cli(["--no-color", "simulate", "--config", str(Path(tmp) / "missing.json")]) == 2


def test_bad_weight_exit_code():
    """Test that an inadmissible weight fails the run with 1."""
    with tempfile.TemporaryDirectory() as tmp:
        config = _write(tmp, "run.json", {"profile": "custom-expression", "weight_expression": "x3",
                                          "n3": 17, "t_end": 0.0, "output_dir": tmp})
        saved = os.environ.pop(OUTPUT_DIR_ENV, None)
        try:
            assert cli(["--no-color", "--no-progress", "simulate", "--config", config]) == 1
        finally:
            if saved is not None:
                os.environ[OUTPUT_DIR_ENV] = saved


def test_simulate_and_energy():
    """Test a short simulation followed by an energy report of its checkpoint."""
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out"
        config = _write(tmp, "run.json", {"preset": "outflow", "eps": 0.2, "n3": 33, "t_end": 0.02,
                                          "cadence": 1, "order": 2, "output_dir": str(out)})
        saved = os.environ.pop(OUTPUT_DIR_ENV, None)
        try:
            assert cli(["--no-color", "--no-progress", "--seed", "5", "simulate", "--config", config]) == 0
        finally:
            if saved is not None:
                os.environ[OUTPUT_DIR_ENV] = saved
        rows = read_energy_csv(out / "energy.csv")
        assert rows[0]["t"] == 0.0
        assert rows[-1]["t"] == 0.02
        run_header = json.loads((out / "run.json").read_text(encoding="utf-8"))
        assert run_header["seed"] == 5
        assert run_header["config"]["eps"] == 0.2
        checkpoint = read_checkpoint(out / "final.json")
        assert checkpoint.state.time == 0.02
        assert checkpoint.header["extra"]["weight"]["profile"] == "parabolic"
        assert cli(["--no-color", "energy", "--checkpoint", str(out / "final.json"), "--order", "2"]) == 0


def test_energy_missing_checkpoint():
    """Test that an unreadable checkpoint fails with 1."""
    assert cli(["--no-color", "energy", "--checkpoint", "/nonexistent/final.json"]) == 1


if __name__ == "__main__":
    test_parser_requires_command()
    test_parser_flags()
    test_verify_list()
    test_verify_single_check()
    test_verify_unknown_check()
    test_verify_checks_from_config()
    test_bad_config_exit_code()
    test_bad_weight_exit_code()
    test_simulate_and_energy()
    test_energy_missing_checkpoint()
    print("All tests passed!")
