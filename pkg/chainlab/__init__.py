"""
chainlab
Finite-horizon certificates and theorem cross-checks for linear consensus
dynamics X(n+1) = A_n X(n).

Features:
- Backward products, ergodicity and class-ergodicity probes
- Balanced-asymmetry, cut-balance and self-confidence certificates
- Absolute infinite flow by dynamic programming over subsets, islands
- Opinion-dynamics and flocking generators
- Scenario manifests with deterministic CSV/JSON reports
"""

import logging

from . import config
from . import data
from . import utils
from .config.constants import APP_NAME, APP_VERSION, APP_AUTHOR, APP_LICENSE

__version__ = APP_VERSION
__author__ = APP_AUTHOR
__license__ = APP_LICENSE

# Library logger; handlers are configured by the application (main.py)
logging.getLogger("chainlab").addHandler(logging.NullHandler())
