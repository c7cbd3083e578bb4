"""
Fixed-cardinality subset enumeration shared by the certificates and the flow DP.
Subsets are ordered by their bitmask (bit i set iff agent i is a member).
"""

from functools import lru_cache
from itertools import combinations
from typing import Tuple

import numpy as np

from ..data.models import AgentSet


@lru_cache(maxsize=256)
def subset_table(order: int, cardinality: int) -> Tuple[Tuple[int, ...], np.ndarray]:
    """
    All subsets of {0..order-1} with the given cardinality.

    Returns:
        (masks, indicators): masks in ascending order and the matching 0/1
        indicator matrix of shape (len(masks), order)
    """
    masks = sorted(sum(1 << i for i in combo) for combo in combinations(range(order), cardinality))
    indicators = np.array([[(mask >> i) & 1 for i in range(order)] for mask in masks], dtype=float)
    indicators = indicators.reshape(len(masks), order)
    indicators.setflags(write=False)
    return tuple(masks), indicators


def mask_to_set(mask: int) -> AgentSet:
    return frozenset(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def cross_sums(entries: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """
    out[p, q] = sum over i in rows[p], j in cols[q] of a_ij, for indicator
    matrices ``rows`` and ``cols``.
    """
    return rows @ entries @ cols.T
