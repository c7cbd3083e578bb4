"""
Data models for chainlab.
Contains the value types exchanged between the analysis modules.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple
import math

import numpy as np
import networkx as nx

from .errors import ManifestError, NotSquare, OrderMismatch
from ..config.constants import (
    FLOW_VARIANTS, ANALYSES, THEOREMS, MANIFEST_SCHEMA,
)

Kernel = Callable[[np.ndarray], np.ndarray]
AgentSet = FrozenSet[int]


def agents_out(agents: Sequence[int]) -> List[int]:
    """Sorted 1-based agent labels for reports (agents are 0-based internally)."""
    return sorted(int(a) + 1 for a in agents)


def encode_extended(value: float) -> Any:
    """JSON encoding of an extended real: +inf becomes the string "inf"."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def _frozen_array(values: Any, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """
    One update step A_n: square, nonnegative, unit row sums.
    The constructor only checks shape; use ``stochastic.validate`` to build one
    from untrusted data.
    """
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise NotSquare(arr.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, index):
        return self.entries[index]

    def allclose(self, other: "StochasticMatrix", atol: float = 1e-12) -> bool:
        return self.order == other.order and bool(np.allclose(self.entries, other.entries, atol=atol, rtol=0.0))

    def to_list(self) -> List[List[float]]:
        return self.entries.tolist()

    def to_dict(self) -> Dict[str, Any]:
        return {"order": self.order, "entries": self.to_list()}


@dataclass(frozen=True, eq=False)
class BackwardProduct:
    """A(n, k) = A_{n-1} A_{n-2} ... A_k"""
    k: int
    n: int
    value: StochasticMatrix

    def __post_init__(self):
        if self.n <= self.k:
            raise ValueError(f"backward product needs n > k, got k={self.k}, n={self.n}")


@dataclass(frozen=True, eq=False)
class ErgodicityVerdict:
    """Outcome of an ergodicity or class-ergodicity probe from a single start index."""
    kind: str
    clusters: Tuple[AgentSet, ...]
    span_curve: np.ndarray
    start: int
    horizon: int
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "span_curve", _frozen_array(self.span_curve))
        if self.kind == "ergodic" and len(self.clusters) != 1:
            raise ValueError("an ergodic verdict must carry the single-block partition")

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    @property
    def final_span(self) -> float:
        return float(self.span_curve[-1]) if len(self.span_curve) else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "clusters": [agents_out(c) for c in self.clusters],
            "start": self.start,
            "horizon": self.horizon,
            "tolerance": self.tolerance,
            "final_span": self.final_span,
        }


@dataclass(frozen=True)
class ConstantWitness:
    """
    Minimal certificate constant of one matrix plus the subset pair attaining it.
    For cut-balance ``s1 == s2`` (the set E). Sets are None when no subset pair
    constrains the constant.
    """
    value: float
    s1: Optional[AgentSet] = None
    s2: Optional[AgentSet] = None

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": encode_extended(self.value),
            "S1": agents_out(self.s1) if self.s1 is not None else None,
            "S2": agents_out(self.s2) if self.s2 is not None else None,
        }


@dataclass(frozen=True, eq=False)
class CertificateReport:
    """Per-step and chain-level certificate constants over a finite horizon."""
    start: int
    horizon: int
    balanced: Tuple[ConstantWitness, ...]
    cut: Tuple[ConstantWitness, ...]
    diagonal_min: np.ndarray
    doubly_stochastic: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "diagonal_min", _frozen_array(self.diagonal_min))

    @property
    def per_step_M(self) -> List[float]:
        return [w.value for w in self.balanced]

    @property
    def per_step_K(self) -> List[float]:
        return [w.value for w in self.cut]

    @property
    def chain_M(self) -> float:
        return max(self.per_step_M, default=1.0)

    @property
    def chain_K(self) -> float:
        return max(self.per_step_K, default=1.0)

    @property
    def delta(self) -> float:
        return float(self.diagonal_min.min()) if len(self.diagonal_min) else 1.0

    @property
    def delta_running(self) -> np.ndarray:
        return np.minimum.accumulate(self.diagonal_min)

    @property
    def all_doubly_stochastic(self) -> bool:
        return all(self.doubly_stochastic)

    def worst_step(self) -> Optional[int]:
        """Step index attaining chain_M (first one on ties)."""
        if not self.balanced:
            return None
        return self.start + int(np.argmax(self.per_step_M))

    def records(self) -> List[Dict[str, Any]]:
        running = self.delta_running
        rows = []
        for t, (bal, cut) in enumerate(zip(self.balanced, self.cut)):
            rows.append({
                "step": self.start + t,
                "M": encode_extended(bal.value),
                "K": encode_extended(cut.value),
                "witness_S1": agents_out(bal.s1) if bal.s1 is not None else None,
                "witness_S2": agents_out(bal.s2) if bal.s2 is not None else None,
                "witness_E": agents_out(cut.s1) if cut.s1 is not None else None,
                "delta_running": float(running[t]),
                "doubly_stochastic": bool(self.doubly_stochastic[t]),
            })
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "horizon": self.horizon,
            "chain_M": encode_extended(self.chain_M),
            "chain_K": encode_extended(self.chain_K),
            "delta": self.delta,
            "doubly_stochastic": self.all_doubly_stochastic,
            "steps": self.records(),
        }


@dataclass(frozen=True)
class DivergenceRule:
    """
    Finite-horizon stand-in for "this series diverges": the truncated sum must
    reach tau_abs and must have grown by at least tau_tail over the second half
    of the horizon.
    """
    tau_abs: float = 1.0
    tau_tail: float = 1.0

    def __post_init__(self):
        if self.tau_abs <= 0 or self.tau_tail <= 0:
            raise ValueError("divergence thresholds must be positive")

    def is_divergent(self, total: float, half: float) -> bool:
        return total >= self.tau_abs and (total - half) >= self.tau_tail

    def to_dict(self) -> Dict[str, Any]:
        return {"name": "two-threshold", "tau_abs": self.tau_abs, "tau_tail": self.tau_tail}


@dataclass(frozen=True, eq=False)
class L1Distance:
    """
    m_n = max |A_n - B_n| entrywise and the running sum m'_n (m'_start = 0).
    ``cumulative`` has one more entry than ``per_step``.
    """
    start: int
    horizon: int
    per_step: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "per_step", _frozen_array(self.per_step))
        object.__setattr__(self, "cumulative", _frozen_array(self.cumulative))
        if len(self.cumulative) != len(self.per_step) + 1:
            raise ValueError("cumulative must have one more entry than per_step")
        if np.any(self.per_step < 0):
            raise ValueError("per-step distances must be nonnegative")

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def trend(self, rule: DivergenceRule) -> str:
        half = float(self.cumulative[len(self.per_step) // 2])
        return "divergent-trend" if rule.is_divergent(self.total, half) else "bounded"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "horizon": self.horizon,
            "total": self.total,
            "max_step": float(self.per_step.max()) if len(self.per_step) else 0.0,
        }


@dataclass(frozen=True)
class SubsetSequence:
    """T(start), T(start+1), ..., T(N): equal-cardinality agent subsets."""
    cardinality: int
    start: int
    sets: Tuple[AgentSet, ...]

    def __post_init__(self):
        for t in self.sets:
            if len(t) != self.cardinality:
                raise ValueError(
                    f"all subsets must have cardinality {self.cardinality}, got {sorted(t)}"
                )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cardinality": self.cardinality,
            "start": self.start,
            "sets": [agents_out(t) for t in self.sets],
        }


@dataclass(frozen=True, eq=False)
class FlowProfile:
    """
    Minimal cumulative flow F_c(n) for n = start..horizon and every cardinality,
    together with the DP argmin sequences.
    """
    variant: str
    order: int
    start: int
    horizon: int
    curves: Dict[int, np.ndarray]
    witnesses: Dict[int, SubsetSequence]
    min_over_c: np.ndarray
    classification: str

    def __post_init__(self):
        if self.variant not in FLOW_VARIANTS:
            raise ValueError(f"unknown flow variant {self.variant!r}")
        object.__setattr__(self, "min_over_c", _frozen_array(self.min_over_c))
        object.__setattr__(self, "curves", {c: _frozen_array(v) for c, v in self.curves.items()})

    @property
    def final_flow(self) -> float:
        return float(self.min_over_c[-1])

    @property
    def argmin_cardinality(self) -> Optional[int]:
        if not self.curves:
            return None
        return min(self.curves, key=lambda c: (self.curves[c][-1], c))

    def rows(self) -> List[Tuple[int, int, float]]:
        """(n, c, F_c(n)) rows, ordered by c then n."""
        out = []
        for c in sorted(self.curves):
            for t, value in enumerate(self.curves[c]):
                out.append((self.start + t, c, float(value)))
        return out

    def to_dict(self) -> Dict[str, Any]:
        c_star = self.argmin_cardinality
        return {
            "variant": self.variant,
            "start": self.start,
            "horizon": self.horizon,
            "classification": self.classification,
            "final_flow": self.final_flow,
            "final_by_cardinality": {str(c): float(v[-1]) for c, v in sorted(self.curves.items())},
            "witness": self.witnesses[c_star].to_dict() if c_star is not None else None,
            "witnesses": {str(c): w.to_dict() for c, w in sorted(self.witnesses.items())},
        }


@dataclass(frozen=True, eq=False)
class InteractionGraph:
    """Truncated interaction weights W_ij(N) and the edges judged unbounded."""
    order: int
    start: int
    horizon: int
    weights: np.ndarray
    half_weights: np.ndarray
    unbounded_edges: FrozenSet[Tuple[int, int]]
    rule: DivergenceRule
    declared: bool = False

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        object.__setattr__(self, "half_weights", _frozen_array(self.half_weights))
        for i, j in self.unbounded_edges:
            if not (0 <= i < self.order and 0 <= j < self.order) or i == j:
                raise ValueError(f"invalid edge ({i}, {j}) for order {self.order}")

    def digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.order))
        graph.add_edges_from(sorted(self.unbounded_edges))
        return graph

    def rows(self) -> List[Tuple[int, int, float, bool]]:
        """(i, j, W_ij, flagged) for every off-diagonal pair, 1-based agents."""
        out = []
        for i in range(self.order):
            for j in range(self.order):
                if i != j:
                    out.append((i + 1, j + 1, float(self.weights[i, j]), (i, j) in self.unbounded_edges))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "start": self.start,
            "horizon": self.horizon,
            "rule": "declared" if self.declared else self.rule.to_dict(),
            "unbounded_edges": [[i + 1, j + 1] for i, j in sorted(self.unbounded_edges)],
        }


@dataclass(frozen=True)
class IslandPartition:
    """Islands (strong components) and the coarser weak components of G_A."""
    islands: Tuple[AgentSet, ...]
    weak_components: Tuple[AgentSet, ...]
    weak_strongly_connected: Tuple[bool, ...]

    def __post_init__(self):
        for island in self.islands:
            if not any(island <= weak for weak in self.weak_components):
                raise ValueError(f"island {sorted(island)} does not refine the weak components")
        if len(self.weak_strongly_connected) != len(self.weak_components):
            raise ValueError("one strong-connectivity flag per weak component is required")

    @property
    def order(self) -> int:
        return sum(len(i) for i in self.islands)

    @property
    def prop2_holds(self) -> bool:
        """Every weak component is strongly connected."""
        return all(self.weak_strongly_connected)

    def island_of(self, agent: int) -> AgentSet:
        for island in self.islands:
            if agent in island:
                return island
        raise KeyError(agent)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "islands": [agents_out(i) for i in self.islands],
            "weak_components": [agents_out(w) for w in self.weak_components],
            "weak_strongly_connected": list(self.weak_strongly_connected),
            "prop2_holds": self.prop2_holds,
        }


@dataclass(frozen=True, eq=False)
class SortedStateView:
    """z_i = X_{perm[i]}, ascending, ties broken by agent index."""
    z: np.ndarray
    perm: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen_array(self.z))
        object.__setattr__(self, "perm", _frozen_array(self.perm, dtype=int))
        if sorted(self.perm.tolist()) != list(range(len(self.perm))):
            raise ValueError("perm must be a permutation of the agents")
        if np.any(np.diff(self.z) < 0):
            raise ValueError("z must be non-decreasing")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States X(start..horizon) of X(n+1) = A_n X(n), one row per time step,
    with the rank permutations used by the sorted view.
    """
    start: int
    states: np.ndarray
    perms: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim != 2:
            raise ValueError("states must be a (steps, agents) array")
        if not np.all(np.isfinite(states)):
            raise ValueError("states must be finite")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "perms", _frozen_array(self.perms, dtype=int))
        if self.perms.shape != states.shape:
            raise OrderMismatch(states.shape[1], self.perms.shape[-1])

    @property
    def order(self) -> int:
        return self.states.shape[1]

    @property
    def horizon(self) -> int:
        return self.start + self.states.shape[0] - 1

    @property
    def z(self) -> np.ndarray:
        return np.take_along_axis(self.states, self.perms, axis=1)

    @property
    def L(self) -> float:
        first = self.states[0]
        return float(first.max() - first.min())

    def state(self, n: int) -> np.ndarray:
        return self.states[n - self.start]

    def sorted_view(self, n: int) -> SortedStateView:
        t = n - self.start
        return SortedStateView(z=self.states[t][self.perms[t]], perm=self.perms[t])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "horizon": self.horizon,
            "L": self.L,
            "final_state": self.states[-1].tolist(),
        }


@dataclass(frozen=True, eq=False)
class LyapunovSeries:
    """
    S_1(n)..S_s(n) with K = 2M (``partial`` has one column per r). ``values``
    is the column for the requested r.
    """
    r: int
    K: float
    L: float
    start: int
    mprime: np.ndarray
    partial: np.ndarray
    lower_bound_increments: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "mprime", _frozen_array(self.mprime))
        object.__setattr__(self, "partial", _frozen_array(self.partial))
        if self.lower_bound_increments is not None:
            object.__setattr__(
                self, "lower_bound_increments", _frozen_array(self.lower_bound_increments)
            )
        if not 1 <= self.r <= self.partial.shape[1]:
            raise ValueError(f"r must lie in 1..{self.partial.shape[1]}")

    @property
    def order(self) -> int:
        return self.partial.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self.partial[:, self.r - 1]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def reconstruct(self) -> np.ndarray:
        """z_i(n) = K^i (S_i(n) - S_{i-1}(n)) - s m'_n L, with S_0 = 0."""
        s = self.order
        padded = np.hstack([np.zeros((self.partial.shape[0], 1)), self.partial])
        powers = self.K ** np.arange(1, s + 1)
        return np.diff(padded, axis=1) * powers - (s * self.mprime * self.L)[:, None]


@dataclass(frozen=True)
class ClusterReport:
    """Agent partition and verdict read off the final window of a trajectory."""
    clusters: Tuple[AgentSet, ...]
    verdict: str
    limits: Tuple[float, ...]
    accumulation_points: int
    window: int
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "clusters": [agents_out(c) for c in self.clusters],
            "limits": list(self.limits),
            "accumulation_points": self.accumulation_points,
            "window": self.window,
            "tolerance": self.tolerance,
        }


def indicator_kernel(radius: float) -> Kernel:
    """f(y) = 1 for y < R, 0 otherwise."""
    return lambda y: (np.asarray(y, dtype=float) < radius).astype(float)


def power_kernel(K: float, sigma: float, beta: float) -> Kernel:
    """f(y) = K / (sigma^2 + y^2)^beta"""
    return lambda y: K / (sigma ** 2 + np.asarray(y, dtype=float) ** 2) ** beta


def _check_non_increasing(kernel: Kernel, upper: float) -> None:
    grid = np.linspace(0.0, upper, 257)
    values = np.asarray(kernel(grid), dtype=float)
    if np.any(values < 0):
        raise ValueError("kernel must be nonnegative")
    if np.any(np.diff(values) > 1e-12):
        raise ValueError("kernel must be non-increasing")


@dataclass
class KrauseParams:
    """Finite-range endogenous model: x0, interaction radius R, kernel f vanishing at R."""
    x0: np.ndarray
    radius: float
    kernel: Optional[Kernel] = None

    def __post_init__(self):
        self.x0 = np.array(self.x0, dtype=float).reshape(-1)
        if self.x0.size < 1 or not np.all(np.isfinite(self.x0)):
            raise ValueError("x0 must be a nonempty finite vector")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kernel is None:
            self.kernel = indicator_kernel(self.radius)
        _check_non_increasing(self.kernel, 2.0 * self.radius)
        if float(self.kernel(np.array([0.0]))[0]) <= 0:
            raise ValueError("kernel must be positive at 0")
        if float(self.kernel(np.array([self.radius]))[0]) != 0.0:
            raise ValueError("kernel must vanish at the interaction radius")

    @property
    def order(self) -> int:
        return self.x0.size


@dataclass
class CuckerSmaleParams:
    """
    Generalised Cucker-Smale flock: positions x0 and velocities v0 as (s, d)
    arrays, time step h, kernel f (or the parametric K, sigma, beta).
    """
    x0: np.ndarray
    v0: np.ndarray
    h: float
    K: Optional[float] = None
    sigma: Optional[float] = None
    beta: Optional[float] = None
    kernel: Optional[Kernel] = None

    def __post_init__(self):
        self.x0 = np.array(self.x0, dtype=float)
        self.v0 = np.array(self.v0, dtype=float)
        for name, arr in (('x0', self.x0), ('v0', self.v0)):
            if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
                raise ManifestError(name, f"must be a list of per-agent vectors (s, d), got shape {arr.shape}")
        if self.x0.shape != self.v0.shape:
            raise ValueError("x0 and v0 must have the same shape")
        if self.h <= 0:
            raise ValueError("time step h must be positive")
        if self.is_parametric:
            if self.K <= 0 or self.sigma <= 0 or self.beta < 0:
                raise ValueError("parametric kernel needs K > 0, sigma > 0, beta >= 0")
            if self.kernel is None:
                self.kernel = power_kernel(self.K, self.sigma, self.beta)
        elif self.kernel is None:
            raise ValueError("either a kernel or (K, sigma, beta) is required")
        _check_non_increasing(self.kernel, 10.0 * (1.0 + self.max_position_gap))

    @property
    def is_parametric(self) -> bool:
        return self.K is not None and self.sigma is not None and self.beta is not None

    @property
    def order(self) -> int:
        return self.x0.shape[0]

    @property
    def max_position_gap(self) -> float:
        return _max_pairwise(self.x0)

    @property
    def max_velocity_gap(self) -> float:
        return _max_pairwise(self.v0)


def _max_pairwise(points: np.ndarray) -> float:
    diffs = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(axis=-1)).max())


@dataclass(frozen=True)
class FlockingCheck:
    """Kernel bound and initial-condition check for the flocking theorem."""
    f_bound_ok: bool
    initial_condition_ok: bool
    M_x: float
    M_v: float
    integral_value: float
    velocity_bound: float
    method: str

    @property
    def ok(self) -> bool:
        return self.f_bound_ok and self.initial_condition_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f_bound_ok": self.f_bound_ok,
            "initial_condition_ok": self.initial_condition_ok,
            "M_x": self.M_x,
            "M_v": self.M_v,
            "integral_value": encode_extended(self.integral_value),
            "velocity_bound": encode_extended(self.velocity_bound),
            "method": self.method,
        }


@dataclass
class Scenario:
    """A parsed scenario manifest."""
    name: str
    chain: Dict[str, Any]
    analyses: List[str]
    horizon: int
    start: Optional[int] = None
    x0: Optional[List[float]] = None
    nominal: Optional[Dict[str, Any]] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    flow: Dict[str, Any] = field(default_factory=dict)
    cross_checks: List[str] = field(default_factory=list)
    output_dir: Optional[str] = None
    seed: Optional[int] = None
    schema: int = MANIFEST_SCHEMA

    def __post_init__(self):
        unknown = [a for a in self.analyses if a not in ANALYSES]
        if unknown:
            raise ValueError(f"unknown analyses: {unknown}")
        bad = [t for t in self.cross_checks if t not in THEOREMS]
        if bad:
            raise ValueError(f"unknown theorems: {bad}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        for key, value in self.tolerances.items():
            if value <= 0:
                raise ValueError(f"tolerance {key} must be positive")


@dataclass(frozen=True)
class TheoremCrossCheck:
    """Prediction from certificates/flow against what the probes observed."""
    theorem: str
    prediction: str
    observation: str
    agreement: bool
    in_scope: bool
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem": self.theorem,
            "prediction": self.prediction,
            "observation": self.observation,
            "agreement": self.agreement,
            "in_scope": self.in_scope,
            "note": self.note,
        }
