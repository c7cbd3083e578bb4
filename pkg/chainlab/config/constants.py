"""
Constants for chainlab.
These are fixed values that don't change during application execution.
"""

# Numerical tolerances
DEFAULT_TOL_ROW = 1e-12        # |rowsum - 1| accepted (and renormalised) by validate
DEFAULT_TOL_SPAN = 1e-8        # ergodicity probe: final row span threshold
DEFAULT_TOL_CLUSTER = 1e-8     # class-ergodicity probe: row proximity threshold
DEFAULT_TOL_MONOTONIC = 1e-10  # Lyapunov monotonicity slack
DEFAULT_TOL_DOUBLY = 1e-10     # column sums for the doubly stochastic test

# Enumeration budgets
MAX_CERTIFICATE_ORDER = 12     # O(4^s) subset pairs per step
MAX_FLOW_ORDER = 20
MAX_FLOW_TRANSITIONS = 25_000_000  # C(s,c)^2 entries per DP transition table
BRUTE_FORCE_BUDGET = 10_000_000    # C(s,c)^(number of sets) sequences
CHAIN_CACHE_SIZE = 4096            # validated matrices kept per generator chain

# Divergence heuristics
DEFAULT_TAU_ABS = 1.0          # unbounded edge: absolute truncated mass
DEFAULT_TAU_TAIL = 1.0         # unbounded edge: mass gained over the second half
DEFAULT_FLOW_THETA = 1.0       # flow-divergent-trend: minimal final flow
DEFAULT_FLOW_SIGMA = 1e-4      # flow-divergent-trend: minimal tail slope per step
FLOW_STABLE_TOL = 1e-12        # bounded-flow witness: tail increase at most this

# Quadrature (flocking integral)
QUAD_TAIL_TOL = 1e-10
QUAD_MAX_DOUBLINGS = 64

# Simulation defaults
DEFAULT_HORIZON = 200
DEFAULT_CLUSTER_WINDOW = 10

# Flow variants
FLOW_FULL = "full"
FLOW_REDUCED = "reduced"
FLOW_VARIANTS = (FLOW_FULL, FLOW_REDUCED)

# Verdict vocabulary
VERDICT_ERGODIC = "ergodic"
VERDICT_CLASS_ERGODIC = "class-ergodic"
VERDICT_UNDECIDED = "undecided-at-horizon"

FLOW_DIVERGENT = "flow-divergent-trend"
FLOW_BOUNDED = "bounded-flow witness"
FLOW_INCONCLUSIVE = "inconclusive"
FLOW_TRIVIAL = "trivially-satisfied"

CLUSTER_CONSENSUS = "consensus"
CLUSTER_MULTIPLE = "multiple-consensus"
CLUSTER_UNSETTLED = "unsettled"

# Scenario manifest
MANIFEST_SCHEMA = 1
ANALYSES = (
    "ergodicity",
    "class-ergodicity",
    "certificates",
    "aif",
    "islands",
    "lyapunov",
    "simulate",
)
THEOREMS = ("T2", "T3", "T4")
TOLERANCE_KEYS = ("row", "span", "cluster", "monotonic", "doubly")
GENERATOR_NAMES = (
    "identity",
    "constant",
    "swap",
    "inv_n",
    "non_balanced",
    "block_diagonal",
    "random_doubly_stochastic",
    "krause",
    "jlm",
    "cucker_smale",
)

# Report files
SUMMARY_FILE = "summary.json"
TRAJECTORY_FILE = "trajectory.csv"
SORTED_FILE = "sorted.csv"
LYAPUNOV_FILE = "lyapunov.csv"
FLOW_FILE = "flow.csv"
GRAPH_FILE = "graph.csv"
CERTIFICATES_FILE = "certificates.json"
CHAIN_FILE = "chain.json"

# Exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DISAGREEMENT = 2

# Environment
OUT_DIR_ENV = "CHAINLAB_OUT_DIR"

# Application information
APP_NAME = "chainlab"
APP_VERSION = "0.1.0"
APP_AUTHOR = "chainlab contributors"
APP_LICENSE = "MIT License"
APP_DESCRIPTION = "Finite-horizon certificates and cross-checks for linear consensus chains"
