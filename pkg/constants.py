MODE_SUPEROSCILLATION = "superoscillation"
MODE_SUPERSHIFT = "supershift"
ALL_MODES = [MODE_SUPEROSCILLATION, MODE_SUPERSHIFT]

SCHEME_EQUISPACED = "equispaced"
SCHEME_CHEBYSHEV = "chebyshev"
SCHEME_CUSTOM = "custom"
ALL_SCHEMES = [SCHEME_EQUISPACED, SCHEME_CHEBYSHEV, SCHEME_CUSTOM]

OPERATOR_U = "U"
OPERATOR_V = "V"

# Builtin power series catalog; values are the parameter names each one takes
BUILTIN_SERIES = {
    "identity": [],
    "monomial": ["p"],
    "exp": [],
    "expi": [],
    "sin": [],
    "cos": [],
    "geometric": ["alpha"],
}

# --- Precision defaults ---
DEFAULT_MIN_BITS = 128
BITS_PER_ORDER = 8
DEFAULT_ESCALATION_FACTOR = 2
DEFAULT_AGREEMENT_TOL = "1e-20"
DEFAULT_MAX_BITS = 8192
MIN_BITS = 64

# --- Truncation defaults ---
DEFAULT_TAIL_TOL = "1e-40"
DEFAULT_SERIES_N_MAX = 16384
DEFAULT_SYMBOL_N_MAX = 512
DEFAULT_SYMBOL_N_START = 16
# |λ|/R above this ratio is treated as outside the disc of convergence
MAX_RADIUS_RATIO = "0.99"
ENVELOPE_SAFETY = 2
RADIUS_ESTIMATE_MIN_TERMS = 32
# A declared radius may exceed the limsup estimate by at most this factor
RADIUS_DECLARED_SLACK = "1.25"
# Ratio between top-quartile and second-quartile root estimates below which a
# coefficient sequence is classified as entire
ENTIRE_DECAY_RATIO = "0.7"
DEFAULT_INFINITY_THRESHOLD = "1e6"

# --- Growth space defaults ---
DEFAULT_B_MIN = "1e-6"
DEFAULT_NORM_MARGIN = "0.01"
DEFAULT_CERTIFICATE_HORIZON = 64
# b fitted on the full horizon may grow at most this much over the half horizon
CERTIFICATE_GROWTH_LIMIT = "1.5"
NORM_RHO0 = "1/8"
NORM_RADII = 48
NORM_ANGLES = 64
NORM_FLOOR = "1e-6"
DEFAULT_PROBE_TERMS = 64
DEFAULT_PROBE_FREQUENCIES = ["1/4", "1/2", "1"]

# Default B when every G is entire
DEFAULT_B_ENTIRE = "1"

# --- Convergence defaults ---
DEFAULT_N_LIST = [4, 8, 12, 16, 20, 24]
DEFAULT_POINTS_PER_AXIS = 9
DEFAULT_CHECK_POINTS_PER_AXIS = 3
DEFAULT_DECREASE_FACTOR = 10
DEFAULT_DECREASING_SHARE = "0.8"
# Fraction of R' used for the default supershift grid box
SUPERSHIFT_BOX_SHRINK = "9/10"

# --- CLI exit codes ---
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DOMAIN = 4
EXIT_IO = 5

CSV_COLUMNS = [
    "n",
    "sup_error",
    "max_coeff_magnitude",
    "bits",
    "dual_route_discrepancy",
]
OUTPUT_DIGITS = 30
