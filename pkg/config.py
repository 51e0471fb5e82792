"""Configuration settings for the coarse extension toolkit."""

import logging
import os

logger = logging.getLogger(__name__)

# Absolute tolerance used by every real comparison
TOLERANCE = 1e-9

# Worker threads for exhaustive pair scans
THREADS_ENV_VAR = "COARSE_EXT_THREADS"


def _threads_from_env() -> int:
    """Read the thread cap from the environment, falling back to the CPU count."""
    default = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {THREADS_ENV_VAR}={raw!r}: not an integer")
        return default
    if value < 1:
        logger.warning(f"Ignoring {THREADS_ENV_VAR}={raw!r}: must be positive")
        return default
    return value


MAX_THREADS = _threads_from_env()

# Row batching for pair scans: at most MAX_BATCHES batches of at least MIN_BATCH_SIZE rows
MIN_BATCH_SIZE = 100
MAX_BATCHES = 100

SHOW_PROGRESS = os.environ.get("COARSE_EXT_PROGRESS", "0") == "1"

# Coordinate spaces up to this size keep their full distance matrix in memory
DENSE_MATRIX_LIMIT = 3000

# Refinement search
EXHAUSTIVE_SEARCH_MAX_POINTS = 24
DEFAULT_SEARCH_BUDGET = 20_000
DEFAULT_SEED = 0

# Report formatting
SIGNIFICANT_DIGITS = 12
INFINITY_TOKEN = "inf"

# Logging for the command line
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVEL = logging.WARNING

# Plot styling
PLOT_FIGSIZE = (8.0, 4.0)
PLOT_HASH_SALT = "coarse-ext"
