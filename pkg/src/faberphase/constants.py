"""Constants for the FaberPhase package."""

# Grids
MIN_RADIAL_NODES = 8
MIN_CARTESIAN_CELLS = 16
QUADRATURE_RTOL = 1e-12
MASS_TOL = 1e-10
NORM_TOL = 1e-10
THETA_MIN = 0.05  # smallest boundary crossing fraction kept by the stencil

# Potential
POTENTIAL_SAMPLES = 10_000
SIMPSON_PANELS = 10_000
FD_STEP = 1e-4
ENDPOINT_ZERO_TOL = 1e-12
FLAT_SLOPE_TOL = 1e-6
CURVATURE_TOL = 1e-3

# Coefficient
DEFAULT_BETA_BAR = 1.0
DEFAULT_KAPPA_USED = 0.5
DEFAULT_C_HALF = 10.0  # multiplied by 1/R^2
COEFFICIENT_SAMPLES = 1_000
ASSUMPTION_EPS = (0.1, 0.05, 0.01, 0.005)
N2_KAPPA_SAMPLE = 0.9

# Eigensolver
DEFAULT_EIGEN_TOL = 1e-8
MAX_EIGEN_TOL = 1e-4
DEFAULT_EIGEN_MAX_ITER = 500
MIN_SHARP_CELLS = 4
SIGN_SLACK = 100.0  # entries above -SIGN_SLACK * tol * max|v| are round-off

# Rearrangement
EXACT_SLACK = 1e-12
NORM_RTOL = 1e-13
PS_SLACK_FRACTION = 1e-2
EIGEN_FK_SLACK = 1e-3
FK_DEFICIT_SLACK = 1e-2
PS_BASE_RTOL = 1e-2
PS_GROWTH_MIN = 0.15
ORACLE_TRIALS = 200
ORACLE_CELLS = 6

# Optimizer
ARMIJO_C = 1e-4
BACKTRACK_FACTOR = 0.5
STEP_GROWTH = 2.0
DEFAULT_OPT_MAX_ITER = 500
DEFAULT_PG_TOL = 1e-4
MIN_STEP_RATIO = 1e-10

# Profile ODE
PROFILE_STEP = 1e-3
FREEZE_TOL = 1e-12
MIN_T_MAX = 20.0
PROFILE_RESIDUAL_GAP = 1e-6
PROFILE_RESIDUAL_TOL = 1e-6
PROFILE_ORACLE_TOL = 1e-4

# Recovery sequences
GAMMA_BETA_BAR = 1e7
GAMMA_C_HALF = 1.0  # multiplied by 1/R^2
GAMMA_EPS_LIST = (0.04, 0.02, 0.01, 0.005)
GAMMA_EIGEN_GAP_TOL = 5e-2
GAMMA_ENERGY_GAP_TOL = 2e-2
GAMMA_PENALTY_TOL = 1e-2
GAMMA_L1_RATE_MIN = 0.9

# Experiments
EIGEN_ORACLE_RTOL = 5e-3
ASYMMETRY_TOL = 1e-2
INTERFACE_RATIO_RANGE = (0.35, 0.65)
DEFAULT_DIMENSION = 2
DEFAULT_RADIUS = 1.0
DEFAULT_GRID = "cartesian"
DEFAULT_CARTESIAN_RESOLUTION = 128
DEFAULT_RADIAL_RESOLUTION = 400
DEFAULT_POTENTIAL = "double-obstacle"
DEFAULT_EPS = 0.05
DEFAULT_GAMMA = 0.01
DEFAULT_MASS = 0.25
DEFAULT_DELTA = 0.1
DEFAULT_INIT = "offset-bump"
DEFAULT_TRIALS = 1000
DEFAULT_FIELD_TRIALS = 20
DEFAULT_SEED = 7
DEFAULT_OUTPUT_DIR = "faberphase-out"
ENV_PREFIX = "FABER_PHASE_"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

# Logging
DEFAULT_LOG_LEVEL = "INFO"
SUPPORTED_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# CSV headers
FIELD_HEADER_RADIAL = ["index", "r_or_x", "value"]
FIELD_HEADER_CARTESIAN = ["index", "r_or_x", "y", "value"]
TRACE_HEADER = ["iter", "J", "lambda1", "E", "step", "pgnorm", "asym"]
PROFILE_HEADER = ["t", "eta"]
GAMMA_HEADER = [
    "eps",
    "F_eps",
    "F_zero",
    "lambda_eps",
    "lambda_zero",
    "eigen_gap",
    "energy_gap",
    "penalty",
    "l1_error",
    "mass",
]
FK_HEADER = [
    "rank",
    "shape",
    "volume",
    "lambda_zero",
    "perimeter",
    "contact",
    "J_zero",
    "fk_deficit",
    "iso_ratio",
]
CHECK_HEADER = ["trial", "name", "lhs", "rhs", "gap", "slack", "passed"]
SWEEP_HEADER = [
    "eps",
    "gamma",
    "seed",
    "J",
    "lambda1",
    "E",
    "asymmetry",
    "eigen_asymmetry",
    "interface_measure",
    "bound",
    "within_bound",
    "converged",
    "iterations",
]
