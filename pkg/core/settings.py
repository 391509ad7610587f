import sys
import os

import psutil

# Add parent directory to path to import local_settings from project root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

VERSION = "1.0.0"
SCHEMA_VERSION = 1

try:
    from local_settings import DEBUG
except ImportError:
    DEBUG = False

try:
    from local_settings import LOGFILE
except ImportError:
    LOGFILE = None

try:
    from local_settings import LOG_LEVEL
except ImportError:
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Seeding. There is no wall-clock fallback anywhere: an unset seed means this one.
try:
    from local_settings import SEED
except ImportError:
    SEED = 20240611

try:
    from local_settings import REPLICA_STRIDE
except ImportError:
    REPLICA_STRIDE = 1

try:
    from local_settings import REPLICAS
except ImportError:
    REPLICAS = 10000

try:
    from local_settings import HORIZONS
except ImportError:
    HORIZONS = [10000, 100000]

try:
    from local_settings import THREADS
except ImportError:
    THREADS = psutil.cpu_count(logical=False) or 1

# Replicas per work block. Blocks, not threads, fix the reduction order.
try:
    from local_settings import BLOCK_SIZE
except ImportError:
    BLOCK_SIZE = 500

try:
    from local_settings import OUTPUT_DIR
except ImportError:
    OUTPUT_DIR = "results"

# Exact oracle
try:
    from local_settings import STATE_BUDGET
except ImportError:
    STATE_BUDGET = 5_000_000

try:
    from local_settings import DIRECT_SOLVE_LIMIT
except ImportError:
    DIRECT_SOLVE_LIMIT = 10_000

try:
    from local_settings import SOLVE_TOLERANCE
except ImportError:
    SOLVE_TOLERANCE = 1e-12

try:
    from local_settings import HORIZON_FACTOR
except ImportError:
    HORIZON_FACTOR = 10_000

# Statistical checks
try:
    from local_settings import Z_LIMIT
except ImportError:
    Z_LIMIT = 4.0

try:
    from local_settings import CONFIDENCE
except ImportError:
    CONFIDENCE = 0.9999

# Classifier thresholds
try:
    from local_settings import RETURN_THRESHOLD
except ImportError:
    RETURN_THRESHOLD = 0.999

try:
    from local_settings import RECURRENT_BETA_CEILING
except ImportError:
    RECURRENT_BETA_CEILING = 0.01

try:
    from local_settings import TRANSIENT_BETA_FLOOR
except ImportError:
    TRANSIENT_BETA_FLOOR = 0.05

try:
    from local_settings import STABILITY_TOLERANCE
except ImportError:
    STABILITY_TOLERANCE = 0.1

# Least share of escaping replicas that must return between the top two horizons
try:
    from local_settings import RECURRENT_DECAY
except ImportError:
    RECURRENT_DECAY = 0.3

# Cookie environment process
try:
    from local_settings import CEP_WINDOW
except ImportError:
    CEP_WINDOW = None

try:
    from local_settings import CENSOR_LIMIT
except ImportError:
    CENSOR_LIMIT = 0.01
