# config/settings.py - Numeric defaults for the thermodynamic formalism engine

import os

# --- Engine Identity ---
ENGINE_NAME = "shiftthermo"
ENGINE_VERSION = "1.0.0"

# --- Logging ---
# The CLI configures the root logger once from these values.
LOG_LEVEL = os.environ.get("THERMO_LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

# --- Storage Envelope ---
# Every finite-memory table is capped at d^k entries.
ALPHABET_MIN = 2
ALPHABET_MAX = 4
TABLE_ENVELOPE = 65_536
PROBE_DEPTH_MAX = 5
FISHER_TIME_MAX = 8

# --- Perron-Frobenius Solver ---
PERRON_TOL = 1e-14
PERRON_MAX_ITER = 100_000

# --- Tolerances ---
JACOBIAN_TOL = 1e-10
IRN_TOL = 1e-12
MASS_TOL = 1e-9
THEOREM_TOL = 1e-10
EQUALITY_TOL = 1e-12
TANGENT_TOL = 1e-12

# --- Green-Kubo Series ---
GREEN_KUBO_TOL = 1e-14
GREEN_KUBO_MAX_TERMS = 10_000
GREEN_KUBO_QUIET_TERMS = 3

# --- Finite Differences ---
FD_STEP = 1e-3
FD_STEP_MIN = 1e-4
FD_STEP_MAX = 1e-2
H_BETA = 1e-3
H_V = 1e-3
THETA_MAX = 0.1

# --- MaxEnt Newton Solver ---
MAXENT_TOL = 1e-12
NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 50
MAXENT_Z_BOUND = 60.0
HYPOTHESIS_A_MIN_EIG = 1e-10

# --- Gibbs Equation ---
BETA_MIN = 0.1
BETA_MAX = 10.0

# --- Randomized Suites ---
DEFAULT_SEED = 42
RANDOM_TRIALS = 100
RANDOM_LOG_RANGE = (-1.0, 1.0)
SUITE_WORKERS = 1

# --- Output ---
OUTPUT_FORMATS = ("json", "csv")
DEFAULT_OUTPUT_FORMAT = "json"


def envelope_allows(alphabet: int, depth: int) -> bool:
    """True when a depth-`depth` table over `alphabet` symbols fits the envelope."""
    return alphabet ** depth <= TABLE_ENVELOPE
