"""
Model zoo for chainlab.
Endogenous opinion and flocking models, the two-agent example chains and
seeded random doubly stochastic chains, plus the generator registry used by
scenario manifests.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from ..config.constants import QUAD_TAIL_TOL, QUAD_MAX_DOUBLINGS
from ..data.errors import KernelBoundViolated, QuadratureFailure
from ..data.models import (
    KrauseParams, CuckerSmaleParams, FlockingCheck, Trajectory, StochasticMatrix,
)
from .chain import ChainSource, StaticChain, ConstantChain, GeneratorChain
from .dynamics import trajectory
from .stochastic import validate

logger = logging.getLogger("chainlab.core.zoo")

# Both off-diagonal interactions of the two-agent examples diverge analytically
_BOTH_WAYS = frozenset({(0, 1), (1, 0)})


def _pairwise_distance(points: np.ndarray) -> np.ndarray:
    if points.ndim == 1:
        return np.abs(points[:, None] - points[None, :])
    diffs = points[:, None, :] - points[None, :, :]
    return np.sqrt((diffs ** 2).sum(axis=-1))


def krause_chain(p: KrauseParams, N: int) -> Tuple[StaticChain, Trajectory]:
    """
    Finite-range endogenous chain: a_ij(n) = f(|X_i - X_j|) / sum_k f(|X_i - X_k|),
    the sum including k = i.

    Returns:
        (chain, trajectory): the realised matrices recorded as a replayable
        static chain, and the coupled state trajectory
    """
    if N < 1:
        raise ValueError("krause_chain needs N >= 1")
    state = p.x0.copy()
    matrices = []
    for _ in range(N):
        weights = np.asarray(p.kernel(_pairwise_distance(state)), dtype=float)
        denominators = weights.sum(axis=1)
        # f(0) > 0 keeps the self term positive
        assert np.all(denominators > 0), "zero interaction denominator"
        matrix = validate(weights / denominators[:, None])
        matrices.append(matrix)
        state = matrix.entries @ state
    chain = StaticChain(matrices, name="krause",
                        params={"x0": p.x0.tolist(), "radius": p.radius})
    logger.info(f"krause run with {p.order} agents for {N} steps")
    return chain, trajectory(chain, p.x0)


def jlm_chain(x0: Sequence[float], radius: float, N: int) -> Tuple[StaticChain, Trajectory]:
    """
    Neighbour averaging on the state itself: a_ij(n) = 1 / (1 + |N_i(n)|) for
    j in N_i(n) and j = i, where N_i(n) holds the agents within ``radius``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if N < 1:
        raise ValueError("jlm_chain needs N >= 1")
    start = np.array(x0, dtype=float).reshape(-1)
    state = start.copy()
    matrices = []
    for _ in range(N):
        linked = (_pairwise_distance(state) <= radius).astype(float)
        matrix = validate(linked / linked.sum(axis=1)[:, None])
        matrices.append(matrix)
        state = matrix.entries @ state
    chain = StaticChain(matrices, name="jlm", params={"x0": start.tolist(), "radius": radius})
    return chain, trajectory(chain, start)


@dataclass(frozen=True)
class FlockRun:
    """Positions and velocities of a Cucker-Smale run with its realised chain."""
    positions: np.ndarray    # (N+1, s, d)
    velocities: np.ndarray   # (N+1, s, d)
    max_distance: np.ndarray  # max pairwise position distance per step
    chain: StaticChain

    @property
    def velocity_spread(self) -> np.ndarray:
        """Per step and coordinate, max_i V_i - min_i V_i."""
        return self.velocities.max(axis=1) - self.velocities.min(axis=1)

    @property
    def velocity_diameter(self) -> np.ndarray:
        """Per step, max pairwise velocity distance."""
        return np.array([_pairwise_distance(v).max() for v in self.velocities])


def cucker_smale_simulate(p: CuckerSmaleParams, N: int) -> FlockRun:
    """
    X_i(n+1) = X_i(n) + h V_i(n)
    V_i(n+1) = V_i(n) + sum_{j != i} f(|X_i(n) - X_j(n)|) (V_j(n) - V_i(n))

    The velocity update matrix (diagonal 1 - sum_j f, off-diagonal f) is shared
    by every spatial coordinate and recorded as the run's chain.

    Raises:
        KernelBoundViolated: when sup f = f(0) >= 1/s
    """
    s = p.order
    sup_f = float(np.asarray(p.kernel(np.array([0.0])), dtype=float)[0])
    if sup_f >= 1.0 / s:
        raise KernelBoundViolated(sup_f, s)
    if N < 1:
        raise ValueError("cucker_smale_simulate needs N >= 1")

    x, v = p.x0.copy(), p.v0.copy()
    positions, velocities, distances, matrices = [x], [v], [], []
    for _ in range(N):
        gaps = _pairwise_distance(x)
        distances.append(gaps.max())
        weights = np.asarray(p.kernel(gaps), dtype=float)
        np.fill_diagonal(weights, 0.0)
        np.fill_diagonal(weights, 1.0 - weights.sum(axis=1))
        matrix = validate(weights)
        matrices.append(matrix)
        x, v = x + p.h * v, matrix.entries @ v
        positions.append(x)
        velocities.append(v)
    distances.append(_pairwise_distance(x).max())

    params = {"x0": p.x0.tolist(), "v0": p.v0.tolist(), "h": p.h}
    if p.is_parametric:
        params.update(K=p.K, sigma=p.sigma, beta=p.beta)
    chain = StaticChain(matrices, name="cucker_smale", params=params)
    logger.info(f"cucker-smale run with {s} agents for {N} steps")
    return FlockRun(
        positions=np.stack(positions),
        velocities=np.stack(velocities),
        max_distance=np.array(distances),
        chain=chain,
    )


def _tail_integral(kernel: Callable, lower: float) -> float:
    """
    Integral of f over [lower, inf): adaptive quadrature on [lower, Y] with Y
    doubled until a doubling adds less than the tail tolerance. Returns +inf
    when the tail never vanishes within the doubling budget.
    """
    f = lambda y: float(np.asarray(kernel(np.array([y])), dtype=float)[0])
    upper = max(2.0 * lower, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            total, _ = integrate.quad(f, lower, upper)
            for _ in range(QUAD_MAX_DOUBLINGS):
                piece, _ = integrate.quad(f, upper, 2.0 * upper)
                total += piece
                upper *= 2.0
                if piece < QUAD_TAIL_TOL:
                    return total
        except integrate.IntegrationWarning as e:
            raise QuadratureFailure(f"quadrature failed beyond {upper:g}: {e}") from e
    if not math.isfinite(total):
        raise QuadratureFailure("quadrature returned a non-finite value")
    return math.inf


def flocking_condition(p: CuckerSmaleParams) -> FlockingCheck:
    """
    Kernel bound sup f < 1/s and the initial condition
    M_v < s / (3h) * integral_{M_x}^inf f(y) dy.

    For the parametric kernel K / (sigma^2 + y^2)^beta the integral diverges
    when beta <= 1/2, and for beta > 1/2 the closed-form sufficient bound
    M_v < sK / (3h (2 beta - 1) (M_x + sigma)^(2 beta - 1)) is used. Other
    kernels are integrated numerically.
    """
    s = p.order
    M_x, M_v = p.max_position_gap, p.max_velocity_gap
    sup_f = float(np.asarray(p.kernel(np.array([0.0])), dtype=float)[0])
    f_bound_ok = sup_f < 1.0 / s

    if p.is_parametric and p.beta <= 0.5:
        integral, bound, method = math.inf, math.inf, "analytic"
    elif p.is_parametric:
        exponent = 2.0 * p.beta - 1.0
        bound = s * p.K / (3.0 * p.h * exponent * (M_x + p.sigma) ** exponent)
        integral = bound * 3.0 * p.h / s
        method = "closed-form"
    else:
        integral = _tail_integral(p.kernel, M_x)
        bound = s / (3.0 * p.h) * integral
        method = "quadrature"

    check = FlockingCheck(
        f_bound_ok=f_bound_ok,
        initial_condition_ok=bool(M_v < bound),
        M_x=M_x,
        M_v=M_v,
        integral_value=integral,
        velocity_bound=bound,
        method=method,
    )
    logger.debug(f"flocking condition ({method}): M_v={M_v:g} bound={bound:g} ok={check.ok}")
    return check


def example_chain(name: str) -> ChainSource:
    """
    The two-agent example chains.

    inv_n: A_n = [[1/n, 1-1/n], [1-1/n, 1/n]] for n >= 1
    non_balanced: constant [[1/2, 1/2], [1, 0]]
    swap: constant [[0, 1], [1, 0]]
    """
    if name == "inv_n":
        def producer(n: int) -> np.ndarray:
            return np.array([[1.0 / n, 1.0 - 1.0 / n], [1.0 - 1.0 / n, 1.0 / n]])
        return GeneratorChain(2, producer, start=1, name="inv_n", unbounded_edges=_BOTH_WAYS)
    if name == "non_balanced":
        return ConstantChain(validate([[0.5, 0.5], [1.0, 0.0]]), name="non_balanced",
                             unbounded_edges=_BOTH_WAYS)
    if name == "swap":
        return ConstantChain(validate([[0.0, 1.0], [1.0, 0.0]]), name="swap")
    raise ValueError(f"unknown example chain {name!r}")


def random_doubly_stochastic_chain(seed: int, s: int, N: int, mix: int = 2) -> StaticChain:
    """
    A_n = sum_k w_k P_k with ``mix`` uniformly drawn permutation matrices and
    Dirichlet(1, ..., 1) weights; reproducible from (seed, s, N, mix).
    """
    if mix < 1:
        raise ValueError("mix must be at least 1")
    if s < 1 or N < 1:
        raise ValueError("order and horizon must be positive")
    rng = np.random.default_rng(seed)
    rows = np.arange(s)
    matrices = []
    for _ in range(N):
        weights = rng.dirichlet(np.ones(mix))
        entries = np.zeros((s, s))
        for w in weights:
            entries[rows, rng.permutation(s)] += w
        matrices.append(validate(entries))
    return StaticChain(matrices, name="random_doubly_stochastic",
                       params={"seed": seed, "order": s, "mix": mix})


def block_diagonal(blocks: Sequence[Any], horizon: Optional[int] = None) -> ConstantChain:
    """Constant chain whose matrix is block diagonal with the given stochastic blocks."""
    validated = [validate(b) for b in blocks]
    s = sum(b.order for b in validated)
    entries = np.zeros((s, s))
    offset = 0
    for b in validated:
        entries[offset:offset + b.order, offset:offset + b.order] = b.entries
        offset += b.order
    return ConstantChain(StochasticMatrix(entries), horizon=horizon, name="block_diagonal",
                         params={"blocks": [b.to_list() for b in validated]})


# Generator registry: name -> builder(params, seed, horizon)

def _identity(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    order = int(params.get("order", 2))
    return ConstantChain(StochasticMatrix(np.eye(order)), name="identity", params={"order": order})


def _constant(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    if "matrix" not in params:
        raise KeyError("matrix")
    return ConstantChain(validate(params["matrix"]), name="constant",
                         params={"matrix": params["matrix"]})


def _example(name: str) -> Callable[..., ChainSource]:
    return lambda params, seed, horizon: example_chain(name)


def _block_diagonal(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    return block_diagonal(params["blocks"])


def _random_doubly(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    return random_doubly_stochastic_chain(
        int(seed if seed is not None else params.get("seed", 0)),
        int(params["order"]), horizon, int(params.get("mix", 2)),
    )


def _krause(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    chain, _ = krause_chain(KrauseParams(x0=params["x0"], radius=float(params["radius"])), horizon)
    return chain


def _jlm(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    chain, _ = jlm_chain(params["x0"], float(params["radius"]), horizon)
    return chain


def _cucker_smale(params: Dict[str, Any], seed: Optional[int], horizon: int) -> ChainSource:
    p = CuckerSmaleParams(
        x0=params["x0"], v0=params["v0"], h=float(params["h"]),
        K=params.get("K"), sigma=params.get("sigma"), beta=params.get("beta"),
    )
    return cucker_smale_simulate(p, horizon).chain


GENERATORS: Dict[str, Callable[[Dict[str, Any], Optional[int], int], ChainSource]] = {
    "identity": _identity,
    "constant": _constant,
    "swap": _example("swap"),
    "inv_n": _example("inv_n"),
    "non_balanced": _example("non_balanced"),
    "block_diagonal": _block_diagonal,
    "random_doubly_stochastic": _random_doubly,
    "krause": _krause,
    "jlm": _jlm,
    "cucker_smale": _cucker_smale,
}


def build_generator(name: str,
                    params: Optional[Dict[str, Any]] = None,
                    seed: Optional[int] = None,
                    horizon: int = 1) -> ChainSource:
    """
    Build a registered generator. Endogenous generators simulate ``horizon``
    steps and return the recorded chain.

    Raises:
        KeyError: unknown generator or missing parameter
    """
    if name not in GENERATORS:
        raise KeyError(name)
    chain = GENERATORS[name](dict(params or {}), seed, horizon)
    logger.debug(f"built generator {name}: {chain!r}")
    return chain
