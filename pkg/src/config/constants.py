"""
Physical constants and numerical defaults for the cylindrical Green's function solver.
"""

from scipy.constants import epsilon_0, inch, mu_0

# Vacuum constants (SI)
EPS0 = epsilon_0  # F/m
MU0 = mu_0  # H/m
INCH = inch  # metres per inch

# Special-function kernel
MAX_ORDER = 512  # largest azimuthal order accepted by the Bessel kernel
RAW_EXPONENT_LIMIT = 700.0  # |Im z| above which raw J/H leave double range
NORMALIZED_FLOOR = 1e-290  # scaled library values below this are treated as lost

# Conditioning
SMALL_ARGUMENT_COEFF = 0.5  # Small regime if |z| < coeff * sqrt(n + 1)
LARGE_IMAG_THRESHOLD = 50.0  # Large regime if |Im z| exceeds this
LARGE_ABS_OFFSET = 40.0  # Large regime if |z| > 2(n + 1) + offset
MODERATE_THRESHOLD = 10.0  # T_m: Moderate factor is 1 while the |J_n| envelope is in [1/T_m, T_m]
RADIAL_WAVENUMBER_FLOOR = 1e-30  # |k_rho| * a below this is a branch-point hit

# Coefficient algebra
SINGULAR_DET_RATIO = 1e-30  # |det M| < ratio * ||M||_F^2 counts as singular
COEFFICIENT_MAGNITUDE_LIMIT = 1e6

# Geometry
INTERFACE_TOLERANCE = 1e-12  # metres

# Summation / quadrature defaults
DEFAULT_N_MAX = 30
DEFAULT_N_INT = 2000
POINTS_PER_PANEL = 24
MODE_TOLERANCE = 1e-6

# Integration path defaults
DETOUR_HEIGHT_FACTOR = 0.4
DETOUR_RE_FRACTION = 0.05
DETOUR_SPAN = 1.5  # detour ends at span * max|k_i|
TRUNCATION_MULTIPLE = 12.0
DSIP_MINOR_FRACTION = 0.5
SWITCH_DISTANCE_FACTOR = 0.25  # DSIP when |z - z'| < factor / max|k_i|
TAIL_ANGLE = 0.5  # radians
TAIL_DECAY = 25.0  # e-folds of the radial/longitudinal decay covered by the tail
TAIL_TOLERANCE = 1e-10
MAX_EXTENSION_PANELS = 40

# Path retries on singular spectral points
PATH_RETRY_ATTEMPTS = 3
DETOUR_GROWTH = 1.5

# Reporting
DB_FLOOR = -400.0
SCHEMA_VERSION = 1

# CLI exit codes
EXIT_SUCCESS = 0
EXIT_SCHEMA_ERROR = 2
EXIT_ALL_FAILED = 3
