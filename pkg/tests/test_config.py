#!/usr/bin/env python3
"""
Tests for configuration.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from profiles import list_profiles


def test_config_values():
    """Test that config values are set."""
    assert hasattr(config, 'DEFAULT_GAMMA')
    assert hasattr(config, 'DEFAULT_EPS')
    assert hasattr(config, 'DEFAULT_N3')
    assert hasattr(config, 'DEFAULT_PROFILE')
    assert hasattr(config, 'CSV_COLUMNS')


def test_config_types():
    """Test that config values have correct types."""
    assert isinstance(config.DEFAULT_GAMMA, float)
    assert isinstance(config.DEFAULT_EPS, float)
    assert isinstance(config.DEFAULT_N3, int)
    assert isinstance(config.DEFAULT_PROFILE, str)
    assert isinstance(config.SHOW_PROGRESS, bool)
    assert isinstance(config.VERBOSE, bool)


def test_config_ranges():
    """Test that config values are in valid ranges."""
    assert 1.0 < config.DEFAULT_GAMMA <= 3.0
    assert config.DEFAULT_EPS >= 0.0
    assert config.DEFAULT_N3 >= 3
    assert 0 < config.DEFAULT_CFL <= 1
    assert config.DEFAULT_CADENCE >= 1
    lo, hi = config.PHYSICAL_VACUUM_BRACKET
    assert 0 < lo < 1 < hi
    assert 0 < config.MAJORANT_WINDOW <= 1


def test_default_profile_registered():
    """Test that the default weight profile exists."""
    assert config.DEFAULT_PROFILE in list_profiles()


def test_csv_columns():
    """Test the energy log header."""
    assert ",".join(config.CSV_COLUMNS) == (
        "t,E_I,E_II,E_III,E_IV,E_total,g0_defect,energy_drift,chi_h_res,min_J,max_eps_v"
    )
    assert config.CHECKPOINT_DTYPE == "f64-le"


if __name__ == "__main__":
    test_config_values()
    test_config_types()
    test_config_ranges()
    test_default_profile_registered()
    test_csv_columns()
    print("All tests passed!")
