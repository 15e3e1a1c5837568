#!/usr/bin/env python3
"""
Configuration settings for the Lagrangian vacuum-flow simulator
"""

# Physical defaults
DEFAULT_GAMMA = 2.0  # Adiabatic exponent (alpha = 1/(gamma - 1) = 1)
DEFAULT_EPS = 0.0  # Inverse light speed (0 = non-relativistic)
DEFAULT_PROFILE = "parabolic"

# Grid and time stepping
DEFAULT_N3 = 129  # Nodes across the slab, both faces included
DEFAULT_CFL = 0.4
DEFAULT_T_END = 0.5
DEFAULT_CADENCE = 10  # Store every n-th accepted step

# Equation of state numerics
NEWTON_TOL = 1e-12  # Relative tolerance of the N <-> rho inversion
NEWTON_MAX_ITER = 200
QUAD_RTOL = 1e-10  # Adaptive quadrature in the energy pair
QUAD_HEAD = 1e-6  # Analytic power-law head of the kappa integral

# Abort thresholds
J_ABORT = 1e-6
SUPERLUMINAL_MARGIN = 1e-9  # Abort when eps*|v| >= 1 - margin

# Weight validation
BOUNDARY_TOL = 1e-12
MAX_WEIGHT_ORDER = 12  # Highest analytic derivative order kept per weight

# Energy diagnostics
MAX_ORDER_PLANAR = 8
MAX_ORDER_3D = 4
HARDY_POINTS = 64  # Gauss-Legendre points on (0, 1)

# Monitored bounds
MAJORANT_EXPONENT = 1.0  # c1 in c0 * (1 + E)^c1
MAJORANT_SAFETY = 2.0
MAJORANT_WINDOW = 0.25  # Fraction of cadence intervals that only calibrate c0
MAJORANT_WARMUP = 3  # Minimum number of calibration-only intervals
PHYSICAL_VACUUM_BRACKET = (0.5, 2.0)  # Relative to the t = 0 value

# Logging
VERBOSE = False
SHOW_PROGRESS = True

# Output settings
OUTPUT_DIR = "output/"
OUTPUT_DIR_ENV = "VACUUM_FLOW_OUTPUT_DIR"
CSV_COLUMNS = (
    "t", "E_I", "E_II", "E_III", "E_IV", "E_total",
    "g0_defect", "energy_drift", "chi_h_res", "min_J", "max_eps_v",
)
CHECKPOINT_DTYPE = "f64-le"
CHECKPOINT_SUFFIX = ".json"
