"""Constants for the errorfloor toolkit."""

# Environment variables
LOG_LEVEL_ENV = "ERRORFLOOR_LOG"
CONFIG_PATH_ENV = "ERRORFLOOR_CONFIG"

# Configuration
DEFAULT_CONFIG_FILE = "errorfloor.yaml"
DEFAULT_DEBUG_LOG_FILE = "errorfloor_debug.log"
LOG_LEVEL_CONFIG_KEY = "logging.level"

# Built-in codes
TANNER_155_NAME = "tanner155"
TANNER_BLOCK_SIZE = 31
TANNER_ROW_BASE = 5
TANNER_COL_BASE = 2

# Iterative decoding
DEFAULT_MAX_ITERATIONS = 50
DEFAULT_TRAPPING_WINDOW = 10
BP_MESSAGE_CLIP = 30.0

# LP decoding
DEFAULT_DEGREE_CAP = 12
TAU_INT = 1e-6
TAU_FEAS = 1e-8
SIMPLEX_PIVOT_TOL = 1e-9
SIMPLEX_REFACTOR_EVERY = 64
SIMPLEX_MAX_PIVOTS = 200_000
LP_BACKENDS = ("simplex", "highs")
# flipped BSC bits weigh 1 + BSC_TIE_BIAS so zero-cost pseudo-codewords fail
BSC_TIE_BIAS = 1e-5

# Instanton search
DELTA = 1e-6
TAU_SURF = 1e-6
TAU_STOP = 1e-4
SCALE_CAP = 20.0
PCS_STEP_CAP = 100
ISA_RETRY_CAP = 50
CRITICAL_SIZE_CAP = 5
AMOEBA_MAX_EVALUATIONS = 2000
AWGN_DEDUP_QUANTUM = 1e-6
DEFAULT_FLIPS = 20
DEFAULT_NOISE_STRENGTH = 1.0
AMOEBA_INITIAL_STEP = 0.1
DOMINANT_NOISE_MASS = 0.9
VERIFY_EXHAUSTIVE_CAP = 12
SURFACE_REBISECT_CAP = 8
SEARCH_METHODS = ("isa", "pcs", "amoeba", "critical")
DEFAULT_TRIALS = 100

# FER
DEFAULT_MIN_ERRORS = 100
DEFAULT_MAX_FRAMES = 10_000_000
DEFAULT_BATCH_SIZE = 1000
WILSON_Z_95 = 1.959963984540054

# Construction
DEFAULT_MAX_BACKTRACKS = 10_000

# CSV headers
FER_CSV_HEADER = ("param", "frames", "errors", "fer", "ci_lo", "ci_hi")
PREDICTION_CSV_HEADER = ("param", "fer_predicted")
SPECTRUM_CSV_HEADER = ("weight", "multiplicity")

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_ALGORITHM = 3
