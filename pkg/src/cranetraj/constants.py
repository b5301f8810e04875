"""Centralized constants for crane-traj.

Physical constants, the kinematic limits of the reference crane, and the
numerical tolerances shared by the solvers live here so that every module
agrees on them.
"""

# =============================================================================
# PHYSICS
# =============================================================================

GRAVITY = 9.81  # m/s²

# Nominal motor point of the running gear (speed in 1/min, torque in Nm)
NOMINAL_SPEED_RPM = 3480.0
NOMINAL_TORQUE_NM = 19.0

# Smoothing velocity for sgn(v) in the friction and copper-loss terms
VELOCITY_SMOOTHING = 1e-3  # m/s


# =============================================================================
# KINEMATIC LIMITS (v_max, a_max, j_max)
# =============================================================================

RUNNING_GEAR_LIMITS: tuple[float, float, float] = (3.0, 0.5, 1.0)
LIFTING_GEAR_LIMITS: tuple[float, float, float] = (0.9, 0.6, 0.6)

DEFAULT_LOAD_MASS = 1000.0  # kg


# =============================================================================
# KINEMATICS
# =============================================================================

# Distances below this are treated as an idle drive
IDLE_DISTANCE = 1e-6  # m

# Horizon ties between the two drives
HORIZON_TIE_TOLERANCE = 1e-9  # s

# Segments shorter than this are not representable
SEGMENT_EPSILON = 1e-9  # s


# =============================================================================
# POWER FLOW
# =============================================================================

FIT_GRID_POINTS = 21
C02_FLOOR = 1e-6  # W·s⁴/m², relative floors are derived from it
SLOW_PROFILE_SAMPLES = 64  # per segment

# Finite-difference steps relative to v_max / a_max
FIRST_DERIVATIVE_STEP = 1e-6
SECOND_DERIVATIVE_STEP = 1e-4


# =============================================================================
# EULER-LAGRANGE ARCS
# =============================================================================

EL_RTOL = 1e-9
EL_ATOL = 1e-11
EL_BVP_TOL = 1e-8
EL_RESIDUAL_TOLERANCE = 1e-6  # in units of P_char / v_char
EL_RESIDUAL_POINTS = 100
EL_DIVERGENCE_FACTOR = 10.0
EL_SINGULAR_FLOOR = 1e-9


# =============================================================================
# ENERGY EVALUATION
# =============================================================================

ROOT_XTOL = 1e-9  # s
QUADRATURE_RTOL = 1e-10
SIGN_SCAN_POINTS = 33


# =============================================================================
# MAP OUTPUT
# =============================================================================

MAP_COLUMNS: list[str] = [
    "s_x",
    "s_y",
    "direction",
    "objective",
    "dominant_axis",
    "T",
    "E_opt_J",
    "E_base_J",
    "saving_rate",
    "classification",
    "n_segments",
    "converged",
]

# Partial files carry the extra columns needed to rebuild cells on resume
PARTIAL_COLUMNS: list[str] = MAP_COLUMNS + ["E_rec_J", "E_con_J", "error"]

COORDINATE_DECIMALS = 9


# =============================================================================
# OPTIMIZER
# =============================================================================

# Every single-move plan family exists from this interval count on; the
# patience counter of the outer iteration starts here
FULL_MOTIF_INTERVALS = 7

# Relative spread of the front- and back-loaded duration seeds
SEED_SKEW = 0.2

# Share of the slack given to each standstill when seeding EL plans
SEED_DWELL_SHARE = 0.25

FEASIBILITY_POLISH_EVALUATIONS = 50
