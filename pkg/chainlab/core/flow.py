"""
Absolute infinite flow at finite horizon for chainlab.

The minimal cumulative flow over equal-cardinality subset sequences is found
by dynamic programming over c-subsets; the unbounded interactions graph and
its islands decide where the flow has to be evaluated.
"""

import logging
import math
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np
import networkx as nx

from ..config.constants import (
    FLOW_FULL, FLOW_REDUCED, FLOW_VARIANTS, MAX_FLOW_TRANSITIONS, BRUTE_FORCE_BUDGET,
    FLOW_DIVERGENT, FLOW_BOUNDED, FLOW_INCONCLUSIVE, FLOW_TRIVIAL, FLOW_STABLE_TOL,
)
from ..config.settings import settings
from ..data.errors import OrderTooLarge, BudgetExceeded
from ..data.models import (
    StochasticMatrix, SubsetSequence, FlowProfile, InteractionGraph, IslandPartition,
    DivergenceRule, AgentSet,
)
from .chain import GeneratorChain, SubChain
from .subsets import subset_table, mask_to_set, cross_sums

if TYPE_CHECKING:
    from .chain import ChainSource

logger = logging.getLogger("chainlab.core.flow")


def transition_costs(matrix: StochasticMatrix, cardinality: int, variant: str = FLOW_FULL) -> np.ndarray:
    """
    cost[p, q] of moving from T(n) = subset p to T(n+1) = subset q through A_n.

    full:    sum_{i in T(n+1), j notin T(n)} a_ij + sum_{i notin T(n+1), j in T(n)} a_ij
    reduced: sum_{i notin T(n+1), j in T(n)} a_ij
    """
    if variant not in FLOW_VARIANTS:
        raise ValueError(f"unknown flow variant {variant!r}")
    _, inside = subset_table(matrix.order, cardinality)
    outside = 1.0 - inside
    # Rows index T(n+1), columns index T(n); transpose to [p, q].
    leaving = cross_sums(matrix.entries, outside, inside)
    if variant == FLOW_REDUCED:
        return leaving.T
    entering = cross_sums(matrix.entries, inside, outside)
    return (entering + leaving).T


def _is_trivial(order: int, cardinality: int) -> bool:
    return order == 1 or cardinality == 0 or cardinality == order


def _check_budget(order: int, cardinality: int, max_order: Optional[int]) -> int:
    limit = int(max_order if max_order is not None else settings.get("max_flow_order"))
    if order > limit:
        raise OrderTooLarge(order, limit, "flow DP")
    states = math.comb(order, cardinality)
    if states * states > MAX_FLOW_TRANSITIONS:
        raise BudgetExceeded(states * states, MAX_FLOW_TRANSITIONS, "flow DP transition table")
    return states


def _trivial_sequence(order: int, cardinality: int, first: int, N: int) -> SubsetSequence:
    members = frozenset(range(cardinality)) if cardinality < order else frozenset(range(order))
    return SubsetSequence(cardinality=len(members), start=first, sets=tuple(members for _ in range(first, N + 1)))


def _flow_dp(chain: "ChainSource",
             first: int,
             N: int,
             cardinality: int,
             variant: str,
             max_order: Optional[int]) -> Tuple[np.ndarray, SubsetSequence]:
    """Running minimum F_c(n) for n = first..N and one argmin sequence."""
    s = chain.order
    if not 0 <= cardinality <= s:
        raise ValueError(f"cardinality must lie in 0..{s}, got {cardinality}")
    chain.check_end(N)
    if N < first:
        raise ValueError(f"horizon {N} precedes start {first}")
    if _is_trivial(s, cardinality):
        return np.zeros(N - first + 1), _trivial_sequence(s, cardinality, first, N)

    states = _check_budget(s, cardinality, max_order)
    masks, _ = subset_table(s, cardinality)
    value = np.zeros(states)
    curve = [0.0]
    steps: List[StochasticMatrix] = []
    for matrix in chain.matrices(first, N) if N > first else ():
        total = value[:, None] + transition_costs(matrix, cardinality, variant)
        value = total.min(axis=0)
        steps.append(matrix)
        curve.append(float(value.min()))

    # Cost-to-go from each subset at each step, then walk forward taking the
    # smallest mask among the minimisers so the witness is the
    # lexicographically smallest optimal sequence.
    to_go = [np.zeros(states)]
    for matrix in reversed(steps):
        to_go.append((transition_costs(matrix, cardinality, variant) + to_go[-1][None, :]).min(axis=1))
    to_go.reverse()
    state = int(np.argmin(to_go[0]))
    path = [state]
    for t, matrix in enumerate(steps):
        row = transition_costs(matrix, cardinality, variant)[state] + to_go[t + 1]
        state = int(np.argmin(row))
        path.append(state)
    sequence = SubsetSequence(
        cardinality=cardinality,
        start=first,
        sets=tuple(mask_to_set(masks[p]) for p in path),
    )
    return np.array(curve), sequence


def min_flow_dp(chain: "ChainSource",
                N: int,
                cardinality: int,
                variant: str = FLOW_FULL,
                start: Optional[int] = None,
                max_order: Optional[int] = None) -> Tuple[float, SubsetSequence]:
    """
    Minimal cumulative flow F_c(N) over all c-subset sequences T(start..N).

    Args:
        chain: The chain
        N: Horizon (number of the last subset in the sequence)
        cardinality: c; c = s or s = 1 is trivially satisfied (cost 0)
        variant: "full" (both cross terms) or "reduced" (leaving term only)
        start: First index (default the chain's start)
        max_order: Order cap (default from settings)

    Returns:
        (F_c(N), witness): the lexicographically smallest optimal sequence,
            comparing T(start) first by bitmask
    """
    first = chain.start if start is None else start
    curve, sequence = _flow_dp(chain, first, N, cardinality, variant, max_order)
    return float(curve[-1]), sequence


def brute_force_min_flow(chain: "ChainSource",
                         N: int,
                         cardinality: int,
                         variant: str = FLOW_FULL,
                         start: Optional[int] = None,
                         budget: int = BRUTE_FORCE_BUDGET) -> float:
    """
    Exhaustive minimum over every c-subset sequence, accumulating costs in the
    same order as the DP. Oracle for ``min_flow_dp``.

    Raises:
        BudgetExceeded: when C(s,c)^(number of subsets) exceeds the budget
    """
    first = chain.start if start is None else start
    s = chain.order
    if _is_trivial(s, cardinality):
        return 0.0
    states = math.comb(s, cardinality)
    needed = float(states) ** (N - first + 1)
    if needed > budget:
        raise BudgetExceeded(needed, budget, "brute-force flow enumeration")
    # totals[t0, t1, ..., tn] = cost of the sequence (t0, ..., tn)
    totals = np.zeros(states)
    for matrix in chain.matrices(first, N) if N > first else ():
        totals = totals[..., None] + transition_costs(matrix, cardinality, variant)
    return float(totals.min())


def classify_flow(curve: np.ndarray,
                  theta: Optional[float] = None,
                  sigma: Optional[float] = None) -> str:
    """
    flow-divergent-trend: final flow >= theta and tail slope (last quarter of
    the horizon) > sigma; bounded-flow witness: no growth over the tail;
    inconclusive otherwise.
    """
    theta = float(theta if theta is not None else settings.get("flow_theta"))
    sigma = float(sigma if sigma is not None else settings.get("flow_sigma"))
    steps = len(curve) - 1
    if steps < 1:
        return FLOW_INCONCLUSIVE
    tail = max(1, steps // 4)
    increase = float(curve[-1] - curve[-1 - tail])
    if curve[-1] >= theta and increase / tail > sigma:
        return FLOW_DIVERGENT
    if increase <= FLOW_STABLE_TOL:
        return FLOW_BOUNDED
    return FLOW_INCONCLUSIVE


def aif_profile(chain: "ChainSource",
                N: int,
                variant: str = FLOW_FULL,
                start: Optional[int] = None,
                theta: Optional[float] = None,
                sigma: Optional[float] = None,
                max_order: Optional[int] = None) -> FlowProfile:
    """
    Run the flow DP for every c = 1..s-1 and classify the minimum over c.
    A bounded-flow witness certifies failure of absolute infinite flow up to N.
    """
    first = chain.start if start is None else start
    s = chain.order
    curves: Dict[int, np.ndarray] = {}
    witnesses: Dict[int, SubsetSequence] = {}
    for c in range(1, s):
        curves[c], witnesses[c] = _flow_dp(chain, first, N, c, variant, max_order)

    if s == 1:
        chain.check_end(N)
        min_over_c = np.zeros(N - first + 1)
        classification = FLOW_TRIVIAL
    else:
        min_over_c = np.min(np.vstack([curves[c] for c in sorted(curves)]), axis=0)
        classification = classify_flow(min_over_c, theta, sigma)
        if classification == FLOW_INCONCLUSIVE:
            logger.warning(f"flow on {chain.name} is inconclusive at horizon {N}")
    logger.info(f"flow profile ({variant}) on {chain.name} to N={N}: {classification}")
    return FlowProfile(
        variant=variant,
        order=s,
        start=first,
        horizon=N,
        curves=curves,
        witnesses=witnesses,
        min_over_c=min_over_c,
        classification=classification,
    )


def unbounded_graph(chain: "ChainSource",
                    N: int,
                    rule: Optional[DivergenceRule] = None,
                    start: Optional[int] = None) -> InteractionGraph:
    """
    Truncated weights W_ij(N) = sum_{n<N} a_ij(n) and the edges flagged as
    unbounded. Analytic declarations carried by the chain override the rule.
    """
    first = chain.start if start is None else start
    if N <= first:
        raise ValueError("unbounded_graph needs N >= 1 step")
    if rule is None:
        rule = DivergenceRule(settings.get("flow_tau_abs"), settings.get("flow_tau_tail"))
    s = chain.order
    middle = first + (N - first) // 2
    weights = np.zeros((s, s))
    half = np.zeros((s, s))
    for n, matrix in enumerate(chain.matrices(first, N), start=first):
        weights += matrix.entries
        if n + 1 == middle:
            half = weights.copy()

    if chain.unbounded_edges is not None:
        edges = frozenset(chain.unbounded_edges)
        declared = True
    else:
        edges = frozenset(
            (i, j) for i in range(s) for j in range(s)
            if i != j and rule.is_divergent(weights[i, j], half[i, j])
        )
        declared = False
    return InteractionGraph(
        order=s, start=first, horizon=N, weights=weights, half_weights=half,
        unbounded_edges=edges, rule=rule, declared=declared,
    )


def islands(graph: InteractionGraph) -> IslandPartition:
    """
    Strongly connected components of the unbounded-edge digraph, the weak
    components, and whether each weak component is strongly connected.
    """
    digraph = graph.digraph()
    strong = sorted((frozenset(c) for c in nx.strongly_connected_components(digraph)), key=min)
    weak = sorted((frozenset(c) for c in nx.weakly_connected_components(digraph)), key=min)
    flags = tuple(nx.is_strongly_connected(digraph.subgraph(w)) for w in weak)
    partition = IslandPartition(islands=tuple(strong), weak_components=tuple(weak),
                                weak_strongly_connected=flags)
    if not partition.prop2_holds:
        logger.info("a weak component is not strongly connected; the chain cannot be balanced asymmetric")
    return partition


def island_restricted_chain(chain: "ChainSource", partition: IslandPartition) -> GeneratorChain:
    """
    B_n: cross-island entries of A_n zeroed and their row mass moved to the
    diagonal so every B_n stays stochastic.
    """
    if partition.order != chain.order:
        raise ValueError("partition does not cover the chain's agents")
    label = np.empty(chain.order, dtype=int)
    for idx, island in enumerate(partition.islands):
        label[sorted(island)] = idx
    cross = label[:, None] != label[None, :]

    def producer(n: int) -> np.ndarray:
        entries = chain.matrix(n).entries.copy()
        removed = np.where(cross, entries, 0.0).sum(axis=1)
        entries[cross] = 0.0
        entries[np.diag_indices_from(entries)] += removed
        return entries

    edges = None
    if chain.unbounded_edges is not None:
        edges = frozenset((i, j) for i, j in chain.unbounded_edges if label[i] == label[j])
    return GeneratorChain(
        chain.order, producer, start=chain.start, horizon=chain.horizon,
        name=f"{chain.name}|islands", params=chain.params, unbounded_edges=edges,
    )


def per_island_aif(chain: "ChainSource",
                   partition: IslandPartition,
                   N: int,
                   variant: str = FLOW_FULL,
                   start: Optional[int] = None,
                   theta: Optional[float] = None,
                   sigma: Optional[float] = None) -> Dict[AgentSet, FlowProfile]:
    """Flow profile of each island's subchain of the island-restricted chain."""
    restricted = island_restricted_chain(chain, partition)
    verdicts: Dict[AgentSet, FlowProfile] = {}
    for island in partition.islands:
        sub = SubChain(restricted, sorted(island))
        verdicts[island] = aif_profile(sub, N, variant, start=start, theta=theta, sigma=sigma)
    return verdicts
