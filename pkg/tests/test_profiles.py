#!/usr/bin/env python3
"""
Tests for weight profiles and initial-data presets.
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from profiles import get_profile, list_profiles, get_preset, list_presets, PROFILES, PRESETS


def test_get_profile_parabolic():
    """Test getting the default profile."""
    profile = get_profile("parabolic")
    assert isinstance(profile, str)
    assert "x3" in profile


def test_get_profile_all():
    """Test getting all available profiles."""
    for name in list_profiles():
        profile = get_profile(name)
        assert isinstance(profile, str)
        assert len(profile) > 0


def test_get_profile_case_insensitive():
    """Test that profile lookup ignores case."""
    assert get_profile("SINE") == get_profile("sine")


def test_get_profile_invalid():
    """Test getting invalid profile raises error."""
    try:
        get_profile("invalid_profile_name")
        assert False, "Should have raised ValueError"
    except ValueError as e:
        assert "parabolic" in str(e)


def test_list_profiles():
    """Test listing available profiles."""
    profiles = list_profiles()
    assert len(profiles) > 0
    assert "parabolic" in profiles
    assert "tilted" in profiles


def test_presets():
    """Test that presets carry three components per entry."""
    assert "outflow" in list_presets()
    for name in list_presets():
        preset = get_preset(name)
        assert preset
        for components in preset.values():
            assert len(components) == 3


def test_get_preset_returns_copy():
    """Test that mutating a preset leaves the registry intact."""
    preset = get_preset("shear")
    preset["eta1"][0] = "1"
    assert get_preset("shear")["eta1"][0] != "1"


def test_get_preset_invalid():
    """Test getting invalid preset raises error."""
    try:
        get_preset("nope")
        assert False, "Should have raised ValueError"
    except ValueError:
        pass


def test_registry_dicts():
    """Test the registry dictionaries."""
    assert isinstance(PROFILES, dict)
    assert isinstance(PRESETS, dict)
    assert "exact" in PRESETS["mms-sine"]


if __name__ == "__main__":
    test_get_profile_parabolic()
    test_get_profile_all()
    test_get_profile_case_insensitive()
    test_get_profile_invalid()
    test_list_profiles()
    test_presets()
    test_get_preset_returns_copy()
    test_get_preset_invalid()
    test_registry_dicts()
    print("All tests passed!")
