"""
Matrix and chain primitives for chainlab.
Validation, backward products A(n,k), row span and the ergodicity probes.
"""

import logging
from typing import TYPE_CHECKING, Any, Iterator, List, Optional, Tuple

import numpy as np
import networkx as nx

from ..config.constants import VERDICT_ERGODIC, VERDICT_CLASS_ERGODIC, VERDICT_UNDECIDED
from ..config.settings import settings
from ..data.errors import (
    NegativeEntry, NonFiniteEntry, RowSumViolation, NotSquare, InconsistentClustering,
)
from ..data.models import StochasticMatrix, BackwardProduct, ErgodicityVerdict, AgentSet

if TYPE_CHECKING:
    from .chain import ChainSource

logger = logging.getLogger("chainlab.core.stochastic")


def validate(matrix: Any, tol_row: Optional[float] = None) -> StochasticMatrix:
    """
    Validate a raw square matrix as a stochastic matrix.

    Entries in [-tol_row, 0) are clipped to 0; rows whose sum is within tol_row
    of 1 are renormalised.

    Args:
        matrix: Square array-like of reals
        tol_row: Row-sum tolerance (default from settings)

    Returns:
        StochasticMatrix: The validated matrix

    Raises:
        NotSquare, NonFiniteEntry, NegativeEntry, RowSumViolation
    """
    tol = settings.tolerance("row", tol_row)
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise NotSquare(arr.shape)

    bad = np.argwhere(~np.isfinite(arr))
    if len(bad):
        raise NonFiniteEntry(int(bad[0][0]), int(bad[0][1]))

    negative = np.argwhere(arr < -tol)
    if len(negative):
        i, j = (int(v) for v in negative[0])
        raise NegativeEntry(i, j, float(arr[i, j]))
    arr[arr < 0] = 0.0

    sums = arr.sum(axis=1)
    for i, total in enumerate(sums):
        if total <= 0 or abs(total - 1.0) > tol:
            raise RowSumViolation(i, float(total))
    off = sums != 1.0
    if np.any(off):
        arr[off] /= sums[off][:, None]
    return StochasticMatrix(arr)


def _span(entries: np.ndarray) -> float:
    return float(np.max(entries.max(axis=0) - entries.min(axis=0)))


def row_span(matrix: StochasticMatrix) -> float:
    """max over columns of (max_i a_ij - min_i a_ij); 0 iff all rows are identical."""
    return _span(matrix.entries)


def _drift_check(product: np.ndarray, order: int, tol_row: float, k: int, n: int) -> None:
    drift = float(np.abs(product.sum(axis=1) - 1.0).max())
    if drift > order * tol_row:
        logger.warning(f"backward product A({n},{k}) row sums drift by {drift:.3g}")


def backward_products(chain: "ChainSource", k: int, N: int) -> Iterator[Tuple[int, np.ndarray]]:
    """
    Yield (n, A(n,k)) for n = k+1..N, each built from the previous one as
    A(n+1,k) = A_n A(n,k).
    """
    chain.check_range(k)
    chain.check_end(N)
    product = np.eye(chain.order)
    for n, step in enumerate(chain.matrices(k, N), start=k):
        product = step.entries @ product
        yield n + 1, product


def backward_product(chain: "ChainSource", k: int, n: int) -> BackwardProduct:
    """
    Compute A(n,k) = A_{n-1} A_{n-2} ... A_k.

    Args:
        chain: The chain
        k: Start index
        n: End index (n > k)

    Returns:
        BackwardProduct: The product

    Raises:
        HorizonExceeded: when k or n leaves the chain's range
    """
    if n <= k:
        raise ValueError(f"backward product needs n > k, got k={k}, n={n}")
    product = None
    for _, product in backward_products(chain, k, n):
        pass
    _drift_check(product, chain.order, settings.tolerance("row"), k, n)
    return BackwardProduct(k=k, n=n, value=StochasticMatrix(product))


def ergodicity_probe(chain: "ChainSource",
                     k: int,
                     N: int,
                     eps_span: Optional[float] = None) -> ErgodicityVerdict:
    """
    Track row_span(A(n,k)) for k < n <= N.

    The verdict is ergodic when the final span is at most eps_span, otherwise
    undecided-at-horizon; a finite product never refutes ergodicity. It only
    covers the start index k.
    """
    if N <= k:
        raise ValueError(f"probe needs k < N, got k={k}, N={N}")
    tol = settings.tolerance("span", eps_span)
    curve = [_span(p) for _, p in backward_products(chain, k, N)]
    agents = frozenset(range(chain.order))
    if curve[-1] <= tol:
        kind = VERDICT_ERGODIC
        clusters: Tuple[AgentSet, ...] = (agents,)
    else:
        kind = VERDICT_UNDECIDED
        clusters = tuple(frozenset({i}) for i in range(chain.order))
    logger.debug(f"ergodicity probe on {chain.name} from k={k} to N={N}: {kind} (span {curve[-1]:.3g})")
    return ErgodicityVerdict(
        kind=kind, clusters=clusters, span_curve=np.array(curve), start=k, horizon=N, tolerance=tol,
    )


def cluster_rows(product: np.ndarray, eps: float) -> List[AgentSet]:
    """
    Single-linkage clusters of rows closer than eps in max norm, audited for
    transitivity.

    Raises:
        InconsistentClustering: when two rows of one cluster differ by >= eps
    """
    s = product.shape[0]
    distance = np.abs(product[:, None, :] - product[None, :, :]).max(axis=2)
    graph = nx.Graph()
    graph.add_nodes_from(range(s))
    graph.add_edges_from((i, j) for i in range(s) for j in range(i + 1, s) if distance[i, j] < eps)
    clusters = sorted((frozenset(c) for c in nx.connected_components(graph)), key=min)
    for cluster in clusters:
        members = sorted(cluster)
        for a, i in enumerate(members):
            for j in members[a + 1:]:
                if distance[i, j] >= eps:
                    raise InconsistentClustering(i, j, float(distance[i, j]), eps)
    return clusters


def class_ergodicity_probe(chain: "ChainSource",
                           k: int,
                           N: int,
                           eps_cluster: Optional[float] = None,
                           settle_window: int = 1) -> ErgodicityVerdict:
    """
    Cluster the rows of A(N,k) and test for a settled block-diagonal limit
    with identical rows inside each block.

    Args:
        chain: The chain
        k: Start index
        N: Horizon
        eps_cluster: Row proximity threshold (default from settings)
        settle_window: A(N,k) must differ from A(N-w,k) by < eps_cluster for
            every w <= settle_window

    Returns:
        ErgodicityVerdict: ergodic (one cluster), class-ergodic, or
        undecided-at-horizon
    """
    if N <= k:
        raise ValueError(f"probe needs k < N, got k={k}, N={N}")
    tol = settings.tolerance("cluster", eps_cluster)
    keep = max(1, settle_window)
    history: List[np.ndarray] = []
    curve = []
    for _, product in backward_products(chain, k, N):
        curve.append(_span(product))
        history.append(product)
        if len(history) > keep + 1:
            history.pop(0)
    final = history[-1]

    clusters = cluster_rows(final, tol)
    members = [np.array(sorted(c)) for c in clusters]

    block_ok = True
    label = np.empty(chain.order, dtype=int)
    for idx, cluster in enumerate(members):
        label[cluster] = idx
    cross = label[:, None] != label[None, :]
    if np.any(final[cross] >= tol):
        block_ok = False

    spans_ok = all(
        _span(final[c]) < tol for c in members
    )
    # The initial A(k,k) = I is never part of the history, so a window of w
    # needs w earlier products.
    settled = all(float(np.abs(final - earlier).max()) < tol for earlier in history[:-1])
    if N - k <= keep:
        settled = False

    if block_ok and spans_ok and settled:
        kind = VERDICT_ERGODIC if len(clusters) == 1 else VERDICT_CLASS_ERGODIC
    else:
        kind = VERDICT_UNDECIDED
    logger.debug(
        f"class probe on {chain.name} from k={k} to N={N}: {kind} with {len(clusters)} clusters "
        f"(block={block_ok}, spans={spans_ok}, settled={settled})"
    )
    return ErgodicityVerdict(
        kind=kind, clusters=tuple(clusters), span_curve=np.array(curve), start=k, horizon=N, tolerance=tol,
    )
