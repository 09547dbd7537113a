"""Constants for the spiked_spectra package."""
"""Version 0.1.0"""

"""Config file sections"""
SECTION_MODEL = "model"
SECTION_SOLVER = "solver"
SECTION_PROFILE = "profile"
SECTION_OUTLIERS = "outliers"
SECTION_DIAGNOSTIC = "diagnostic"
SECTION_SCENARIO = "scenario"
SECTION_TOLERANCES = "tolerances"

"""Model keys"""
CONF_KIND = "kind"
CONF_N = "n"
CONF_M = "m"
CONF_ALPHA = "alpha"
CONF_THETA = "theta"
CONF_BASE_SPECTRUM = "base_spectrum"
CONF_LOCATION = "location"
CONF_WEIGHT = "weight"
CONF_ENTRY_LAW = "entry_law"
CONF_SEED = "seed"

"""Solver keys"""
CONF_TOLERANCE = "tolerance"
CONF_MAX_ITERATIONS = "max_iterations"
CONF_DAMPING = "damping"
CONF_GUARD = "guard"

"""Profile / outlier / diagnostic keys"""
CONF_START = "start"
CONF_STOP = "stop"
CONF_STEP = "step"
CONF_WINDOW_EXPONENT = "window_exponent"
CONF_WINDOW_SCALE = "window_scale"
CONF_INTERIOR_TRIM = "interior_trim"
CONF_MAX_NOISE = "max_noise"
CONF_MARGIN = "margin"
CONF_ENERGIES = "energies"
CONF_ETAS = "etas"
CONF_TAU = "tau"

"""Scenario keys"""
CONF_NAME = "name"
CONF_SEEDS = "seeds"
CONF_OUTPUTS = "outputs"
CONF_CURVES = "curves"
CONF_WORKERS = "workers"

"""Tolerance keys"""
TOL_OUTLIER_LOCATION = "outlier_location"
TOL_OUTLIER_MASS = "outlier_mass"
TOL_PROFILE_SUP_ERROR = "profile_sup_error"
TOL_LOCAL_LAW_RATIO = "local_law_ratio"
TOL_LOCAL_LAW_SLOPE = "local_law_slope"

"""Enumerated values"""
MODEL_ADDITIVE = "additive"
MODEL_MULTIPLICATIVE = "multiplicative"
MODELS = [MODEL_ADDITIVE, MODEL_MULTIPLICATIVE]
LAW_GAUSSIAN = "gaussian"
LAW_RADEMACHER = "rademacher"
LAW_UNIFORM = "uniform"
ENTRY_LAWS = [LAW_GAUSSIAN, LAW_RADEMACHER, LAW_UNIFORM]
CURVE_DENSITY = "density"
CURVE_PROFILE = "profile"
CURVE_OUTLIER = "outlier"
CURVES = [CURVE_DENSITY, CURVE_PROFILE, CURVE_OUTLIER]
SOURCE_CLOSED_FORM = "closed-form"
SOURCE_FIXED_POINT = "fixed-point"
SOURCE_EMPIRICAL = "empirical"

"""Measures"""
ATOM_MERGE_TOLERANCE = 1e-12
ATOMIC_MASS_TOLERANCE = 1e-12
SPECTRAL_MASS_TOLERANCE = 1e-8
MAX_MOMENT_ORDER = 16
ETA_CLOSED_FORM = 1e-8
ETA_FIXED_POINT = 1e-4

"""Fixed-point solver"""
DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_ITERATIONS = 100_000
DEFAULT_DAMPING = 0.5
FALLBACK_DAMPING = 0.25
DEFAULT_GUARD = 1e-4
POLISH_STEPS = 2
REAL_AXIS_STEPS = 40

"""Support scan and outliers"""
SCAN_STEP = 1e-3
SCAN_PADDING = 4.0
DENSITY_THRESHOLD = 1e-6
ALGEBRAIC_ATOM_LIMIT = 24
W_PRIME_STEP = 1e-6
F_PRIME_STEP = 1e-7
TANGENCY_THRESHOLD = 1e-10
BISECTION_XTOL = 1e-13
CLUSTER_TOLERANCE = 1e-6
DEFAULT_MARGIN = 0.1

"""Overlap profiles and local law"""
DEFAULT_WINDOW_EXPONENT = 0.1
DEFAULT_WINDOW_SCALE = 0.5
TRIM_ADDITIVE = 0.2
TRIM_MULTIPLICATIVE = 0.4
MIN_PROFILE_COVERAGE = 0.5
DEFAULT_TAU = 0.1
DIVISION_THRESHOLD = 1e-8

"""Eigensolver"""
SYMMETRY_TOLERANCE = 1e-10
EIG_RESIDUAL_TOLERANCE = 1e-8
EIG_ORTHOGONALITY_TOLERANCE = 1e-8

"""Experiments"""
DEFAULT_OUTPUTS = "outputs"
DEFAULT_WORKERS = 4
FLOAT_FORMAT = "%.10g"

"""Scenario defaults"""
DEFAULT_SCENARIO_NAME = "scenario"
DEFAULT_GRID_STEP = 0.01
DEFAULT_ETAS = [0.2, 0.1, 0.05, 0.025]
DEFAULT_TOLERANCES = {
    TOL_OUTLIER_LOCATION: 0.05,
    TOL_OUTLIER_MASS: 0.05,
    TOL_PROFILE_SUP_ERROR: 0.15,
    TOL_LOCAL_LAW_RATIO: 5.0,
}
PSD_TOLERANCE = 1e-8
