"""
State dynamics for chainlab.
Trajectories of X(n+1) = A_n X(n), sorted views, the Lyapunov series of
sorted states and cluster detection on the final window of a run.
"""

import logging
import math
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np
import networkx as nx

from ..config.constants import CLUSTER_CONSENSUS, CLUSTER_MULTIPLE, CLUSTER_UNSETTLED
from ..config.settings import settings
from ..data.errors import InfiniteM, OrderMismatch
from ..data.models import StochasticMatrix, Trajectory, LyapunovSeries, ClusterReport

if TYPE_CHECKING:
    from .chain import ChainSource

logger = logging.getLogger("chainlab.core.dynamics")


def step(matrix: StochasticMatrix, x: Sequence[float]) -> np.ndarray:
    """One update X(n+1) = A_n X(n); each entry is a convex combination of x."""
    state = np.asarray(x, dtype=float)
    if state.shape[0] != matrix.order:
        raise OrderMismatch(matrix.order, state.shape[0])
    return matrix.entries @ state


def trajectory(chain: "ChainSource",
               x0: Sequence[float],
               k: Optional[int] = None,
               N: Optional[int] = None) -> Trajectory:
    """
    Iterate the chain from state x0 at time k up to time N.

    Args:
        chain: The chain
        x0: Initial state, one value per agent
        k: Start time (default the chain's start)
        N: Final time (default the chain's horizon)

    Returns:
        Trajectory: States X(k..N) and their rank permutations
    """
    first = chain.start if k is None else k
    last = chain.resolve_horizon(N)
    if last <= first:
        raise ValueError(f"trajectory needs k < N, got k={first}, N={last}")
    state = np.asarray(x0, dtype=float).reshape(-1)
    if state.shape[0] != chain.order:
        raise OrderMismatch(chain.order, state.shape[0])

    states = [state]
    for matrix in chain.matrices(first, last):
        state = step(matrix, state)
        states.append(state)
    stacked = np.vstack(states)
    # stable: equal states keep ascending agent order
    perms = np.argsort(stacked, axis=1, kind="stable")
    logger.debug(f"trajectory of {chain.name} from {first} to {last}")
    return Trajectory(start=first, states=stacked, perms=perms)


def increment_lower_bounds(traj: Trajectory, chain: "ChainSource", K: float, r: int) -> np.ndarray:
    """
    Per-step lower bound on S_r(n+1) - S_r(n):
    K^-s * sum_{k<r} (sum_{i>k, j<=k} b_{i_{n+1} j_n}) (z_{k+1}(n) - z_k(n))
    with ranks i, j taken from the sorted views at n+1 and n.
    """
    s = traj.order
    z = traj.z
    bounds = np.zeros(traj.states.shape[0] - 1)
    scale = K ** (-s)
    for t, matrix in enumerate(chain.matrices(traj.start, traj.horizon)):
        ranked = matrix.entries[np.ix_(traj.perms[t + 1], traj.perms[t])]
        gaps = np.diff(z[t])
        total = 0.0
        for k in range(1, r):
            total += ranked[k:, :k].sum() * gaps[k - 1]
        bounds[t] = scale * total
    return bounds


def lyapunov_series(traj: Trajectory,
                    r: int,
                    M: float,
                    mprime: Optional[Sequence[float]] = None,
                    nominal: Optional["ChainSource"] = None) -> LyapunovSeries:
    """
    S_r(n) = sum_{i<=r} K^-i (z_i(n) + s m'_n L) with K = 2M.

    Args:
        traj: The trajectory
        r: Index 1..s of the reported series (all S_1..S_s are kept)
        M: Balanced-asymmetry constant, finite and >= 1
        mprime: Cumulative l1 distance to the nominal chain per time step;
            zero when omitted
        nominal: Nominal chain B_n; when given, the per-step increment lower
            bounds are stored with the series

    Raises:
        InfiniteM: when M is +inf
    """
    if math.isinf(M):
        raise InfiniteM()
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    s = traj.order
    if not 1 <= r <= s:
        raise ValueError(f"r must lie in 1..{s}")
    steps = traj.states.shape[0]
    if mprime is None:
        mp = np.zeros(steps)
    else:
        mp = np.asarray(mprime, dtype=float)
        if mp.shape != (steps,):
            raise ValueError(f"mprime needs {steps} values, got {mp.shape[0]}")
        if mp[0] != 0 or np.any(np.diff(mp) < 0):
            raise ValueError("mprime must start at 0 and be non-decreasing")

    K = 2.0 * M
    weights = K ** -np.arange(1, s + 1, dtype=float)
    shifted = traj.z + (s * mp * traj.L)[:, None]
    partial = np.cumsum(shifted * weights, axis=1)
    bounds = increment_lower_bounds(traj, nominal, K, r) if nominal is not None else None
    return LyapunovSeries(
        r=r, K=K, L=traj.L, start=traj.start, mprime=mp, partial=partial,
        lower_bound_increments=bounds,
    )


def check_S_monotonic(series: LyapunovSeries,
                      traj: Trajectory,
                      chain: "ChainSource",
                      tol: Optional[float] = None) -> List[int]:
    """
    Steps n at which S_r(n+1) - S_r(n) falls below the lower bound computed
    from ``chain`` (or below zero) by more than tol. Violations are data: a
    non-empty list means the certificate preconditions do not hold.
    """
    tolerance = settings.tolerance("monotonic", tol)
    bounds = increment_lower_bounds(traj, chain, series.K, series.r)
    increments = series.increments
    violations = [
        traj.start + t for t in range(len(increments))
        if increments[t] < bounds[t] - tolerance or increments[t] < -tolerance
    ]
    if violations:
        logger.info(f"S_{series.r} monotonicity violated at {len(violations)} steps on {chain.name}")
    return violations


def tail_oscillation(traj: Trajectory, fraction: float = 0.1) -> np.ndarray:
    """max - min of each sorted coordinate z_i over the last ``fraction`` of the run."""
    steps = traj.states.shape[0]
    tail = traj.z[steps - max(2, int(math.ceil(steps * fraction))):]
    return tail.max(axis=0) - tail.min(axis=0)


def detect_clusters(traj: Trajectory,
                    eps: Optional[float] = None,
                    window: Optional[int] = None) -> ClusterReport:
    """
    Cluster agents whose states stay within eps of each other over the last
    ``window`` steps.

    Args:
        traj: The trajectory
        eps: Proximity threshold (default the cluster tolerance)
        window: Number of final steps inspected (default from settings)

    Returns:
        ClusterReport: consensus for a single cluster, multiple-consensus when
        every agent moved less than eps across the window, unsettled otherwise
    """
    tol = settings.tolerance("cluster", eps)
    width = int(window if window is not None else settings.get("cluster_window"))
    steps = traj.states.shape[0] - 1
    if width < 0 or steps - width < 0:
        raise ValueError(f"window {width} exceeds the {steps} recorded steps")
    tail = traj.states[steps - width:]

    s = traj.order
    spread = np.abs(tail[:, :, None] - tail[:, None, :]).max(axis=0)
    graph = nx.Graph()
    graph.add_nodes_from(range(s))
    graph.add_edges_from((i, j) for i in range(s) for j in range(i + 1, s) if spread[i, j] < tol)
    clusters = tuple(sorted((frozenset(c) for c in nx.connected_components(graph)), key=min))

    moved = tail.max(axis=0) - tail.min(axis=0)
    if len(clusters) == 1:
        verdict = CLUSTER_CONSENSUS
    elif np.all(moved < tol):
        verdict = CLUSTER_MULTIPLE
    else:
        verdict = CLUSTER_UNSETTLED

    limits = np.sort(traj.states[-1])
    points = 1 + int(np.sum(np.diff(limits) >= tol))
    return ClusterReport(
        clusters=clusters,
        verdict=verdict,
        limits=tuple(float(v) for v in limits),
        accumulation_points=points,
        window=width,
        tolerance=tol,
    )
