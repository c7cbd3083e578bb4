"""
Chain certificates for chainlab.
Balanced asymmetry constant M, cut-balance constant K, self-confidence delta,
the doubly stochastic test, and the l1 distance between two chains.
"""

import logging
import math
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..config.settings import settings
from ..data.errors import OrderMismatch, OrderTooLarge
from ..data.models import StochasticMatrix, ConstantWitness, CertificateReport, L1Distance
from .subsets import subset_table, mask_to_set, cross_sums

if TYPE_CHECKING:
    from .chain import ChainSource

logger = logging.getLogger("chainlab.core.properties")


def _check_order(order: int, max_order: Optional[int]) -> None:
    limit = int(max_order if max_order is not None else settings.get("max_certificate_order"))
    if order > limit:
        raise OrderTooLarge(order, limit, "certificate enumeration")


def _cross_tables(entries: np.ndarray, cardinality: int) -> Tuple[Tuple[int, ...], np.ndarray, np.ndarray]:
    """
    For all pairs (S1, S2) of c-subsets:
    left[p, q]  = sum_{i in S1_p, j not in S2_q} a_ij
    right[p, q] = sum_{i not in S1_p, j in S2_q} a_ij
    """
    masks, inside = subset_table(entries.shape[0], cardinality)
    outside = 1.0 - inside
    left = cross_sums(entries, inside, outside)
    right = cross_sums(entries, outside, inside)
    return masks, left, right


def _ratios(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """left/right with 0/anything -> no constraint (-inf) and positive/0 -> +inf."""
    ratio = np.full(left.shape, -math.inf)
    constrained = left > 0
    finite = constrained & (right > 0)
    ratio[finite] = left[finite] / right[finite]
    ratio[constrained & ~finite] = math.inf
    return ratio


def balanced_asymmetry_constant(matrix: StochasticMatrix,
                                max_order: Optional[int] = None) -> ConstantWitness:
    """
    Smallest M >= 1 with sum_{S1 x not S2} a_ij <= M sum_{not S1 x S2} a_ij for
    every pair of equal-cardinality nonempty subsets.

    Exhaustive over all pairs at every cardinality 1..s-1 (c = s is vacuous).
    Pairs with a zero left side impose nothing; a positive left side against a
    zero right side gives +inf.

    Args:
        matrix: The step matrix
        max_order: Enumeration cap (default from settings)

    Returns:
        ConstantWitness: M and the first (S1, S2) attaining the maximal ratio
    """
    s = matrix.order
    _check_order(s, max_order)
    best, witness = -math.inf, (None, None)
    for c in range(1, s):
        masks, left, right = _cross_tables(matrix.entries, c)
        ratio = _ratios(left, right)
        flat = int(np.argmax(ratio))
        value = float(ratio.flat[flat])
        if value > best:
            p, q = divmod(flat, len(masks))
            best, witness = value, (mask_to_set(masks[p]), mask_to_set(masks[q]))
            if math.isinf(best) and best > 0:
                break
    if witness[0] is None:
        return ConstantWitness(1.0)
    return ConstantWitness(max(1.0, best), witness[0], witness[1])


def cut_balance_constant(matrix: StochasticMatrix,
                         max_order: Optional[int] = None) -> ConstantWitness:
    """
    Smallest K >= 1 with sum_{E x not E} a_ij <= K sum_{not E x E} a_ij for
    every nonempty proper subset E: the S1 = S2 restriction of the balanced
    asymmetry constraints, computed from the same cross tables.
    """
    s = matrix.order
    _check_order(s, max_order)
    best, witness = -math.inf, None
    for c in range(1, s):
        masks, left, right = _cross_tables(matrix.entries, c)
        ratio = _ratios(np.diag(left), np.diag(right))
        p = int(np.argmax(ratio))
        if ratio[p] > best:
            best, witness = float(ratio[p]), mask_to_set(masks[p])
            if math.isinf(best) and best > 0:
                break
    if witness is None:
        return ConstantWitness(1.0)
    return ConstantWitness(max(1.0, best), witness, witness)


def self_confidence(chain: "ChainSource", N: int, start: Optional[int] = None) -> float:
    """min over start <= n < N and agents i of a_ii(n)"""
    first = chain.start if start is None else start
    if N <= first:
        raise ValueError("self_confidence needs N >= 1 step")
    return min(float(np.diag(m.entries).min()) for m in chain.matrices(first, N))


def is_doubly_stochastic(matrix: StochasticMatrix, tol: Optional[float] = None) -> bool:
    """True iff every column sums to 1 within tol."""
    tolerance = settings.tolerance("doubly", tol)
    return bool(np.all(np.abs(matrix.entries.sum(axis=0) - 1.0) <= tolerance))


def certify_chain(chain: "ChainSource",
                  N: int,
                  start: Optional[int] = None,
                  max_order: Optional[int] = None,
                  tol_doubly: Optional[float] = None) -> CertificateReport:
    """
    Per-step certificates for A_start .. A_{N-1}. Chain-level constants are
    suprema over this horizon only.
    """
    first = chain.start if start is None else start
    _check_order(chain.order, max_order)
    balanced, cut, diagonal, doubly = [], [], [], []
    for matrix in chain.matrices(first, N):
        balanced.append(balanced_asymmetry_constant(matrix, max_order))
        cut.append(cut_balance_constant(matrix, max_order))
        diagonal.append(float(np.diag(matrix.entries).min()))
        doubly.append(is_doubly_stochastic(matrix, tol_doubly))
    report = CertificateReport(
        start=first,
        horizon=N,
        balanced=tuple(balanced),
        cut=tuple(cut),
        diagonal_min=np.array(diagonal),
        doubly_stochastic=tuple(doubly),
    )
    logger.info(
        f"certified {chain.name} over [{first}, {N}): M={report.chain_M:g}, K={report.chain_K:g}, "
        f"delta={report.delta:g}"
    )
    return report


def l1_distance(chain_a: "ChainSource", chain_b: "ChainSource", N: int) -> L1Distance:
    """
    m_n = max_ij |a_ij(n) - b_ij(n)| and m'_n = sum_{k<n} m_k over the common
    index range [max(starts), N).
    """
    if chain_a.order != chain_b.order:
        raise OrderMismatch(chain_a.order, chain_b.order)
    first = max(chain_a.start, chain_b.start)
    per_step = np.array([
        float(np.abs(a.entries - b.entries).max())
        for a, b in zip(chain_a.matrices(first, N), chain_b.matrices(first, N))
    ])
    cumulative = np.concatenate([[0.0], np.cumsum(per_step)])
    return L1Distance(start=first, horizon=N, per_step=per_step, cumulative=cumulative)
