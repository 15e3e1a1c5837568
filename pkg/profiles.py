#!/usr/bin/env python3
"""
Named weight profiles and initial-data presets.

Weights vanish like the distance to the faces x3 = 0 and x3 = 1.
Presets bundle initial data (and exact solutions for manufactured runs)
as expression strings.
"""

# Default profile - w = d(x, boundary) * (1 - d), comparability (1/2, 1)
PARABOLIC_PROFILE = "x3*(1 - x3)"

# Twice the default, comparability (1, 2)
SCALED_PARABOLIC_PROFILE = "2*x3*(1 - x3)"

# Smooth sine bump, comparability (2/pi, 1)
SINE_PROFILE = "sin(pi*x3)/pi"

# Tangentially modulated parabola - exercises the x1 derivatives in 3D
TILTED_PROFILE = "x3*(1 - x3)*(1 + cos(2*pi*x1)/2)"

# All available weight profiles
PROFILES = {
    "parabolic": PARABOLIC_PROFILE,
    "scaled-parabolic": SCALED_PARABOLIC_PROFILE,
    "sine": SINE_PROFILE,
    "tilted": TILTED_PROFILE,
}

# Initial data presets: eta0 / eta1 components, optional exact solution
PRESETS = {
    "rest": {
        "eta0": ["x1", "x2", "x3"],
        "eta1": ["0", "0", "0"],
    },
    "outflow": {
        "eta0": ["x1", "x2", "x3"],
        "eta1": ["0", "0", "0.2*(x3 - 1/2)"],
    },
    "shear": {
        "eta0": ["x1", "x2", "x3"],
        "eta1": ["0.05*sin(pi*x3)", "0", "0"],
    },
    # Manufactured maps are not polynomial in x3: the stencils reproduce quadratics exactly
    "mms-sine": {
        "exact": ["x1", "x2", "x3 + 0.1*sin(t)*sin(pi*x3)/pi"],
    },
    "mms-quadratic": {
        "exact": ["x1", "x2", "x3 + 0.1*t^2*sin(pi*x3)/pi"],
    },
}


def get_profile(name: str = "parabolic") -> str:
    """
    Get a weight profile expression by name.

    Args:
        name: The name of the profile

    Returns:
        The profile expression string

    Raises:
        ValueError: If profile name is not found
    """
    if name.lower() not in PROFILES:
        available = ", ".join(PROFILES.keys())
        raise ValueError(f"Unknown weight profile '{name}'. Available: {available}")
    return PROFILES[name.lower()]


def list_profiles() -> list:
    """
    Get list of all available profile names.

    Returns:
        List of profile names
    """
    return list(PROFILES.keys())


def get_preset(name: str) -> dict:
    """
    Get an initial-data preset by name.

    Args:
        name: The name of the preset

    Returns:
        A fresh dict with "eta0"/"eta1" and/or "exact" component lists

    Raises:
        ValueError: If preset name is not found
    """
    if name.lower() not in PRESETS:
        available = ", ".join(PRESETS.keys())
        raise ValueError(f"Unknown preset '{name}'. Available: {available}")
    return {key: list(value) for key, value in PRESETS[name.lower()].items()}


def list_presets() -> list:
    """Get list of all available preset names."""
    return list(PRESETS.keys())
