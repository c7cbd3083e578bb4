"""
Chain sources for chainlab.
A chain is an indexed producer of stochastic matrices (A_n) for start <= n < horizon.
"""

import logging
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Any, Callable, Dict, FrozenSet, Iterator, Optional, Sequence, Tuple

import numpy as np

from ..config.constants import CHAIN_CACHE_SIZE
from ..data.errors import HorizonExceeded, OrderMismatch
from ..data.models import StochasticMatrix
from .stochastic import validate

logger = logging.getLogger("chainlab.core.chain")

Edge = Tuple[int, int]


class ChainSource(ABC):
    """
    Base class for chains. Subclasses implement ``_produce``; ``matrix`` adds
    range checking. Repeated queries at the same index return equal matrices.
    """

    def __init__(self,
                 order: int,
                 start: int = 0,
                 horizon: Optional[int] = None,
                 name: str = "chain",
                 params: Optional[Dict[str, Any]] = None,
                 unbounded_edges: Optional[FrozenSet[Edge]] = None):
        if order < 1:
            raise ValueError("chain order must be at least 1")
        if horizon is not None and horizon < start:
            raise ValueError("chain horizon precedes its start index")
        self.order = order
        self.start = start
        self.horizon = horizon
        self.name = name
        self.params = dict(params or {})
        # Analytically known divergent interactions; overrides the numeric rule
        self.unbounded_edges = frozenset(unbounded_edges) if unbounded_edges is not None else None

    @property
    def kind(self) -> str:
        return "generator"

    def check_range(self, n: int) -> None:
        if n < self.start or (self.horizon is not None and n >= self.horizon):
            raise HorizonExceeded(n, self.start, self.horizon)

    def check_end(self, n: int) -> None:
        """``n`` may equal the horizon when it is the end of a product or run."""
        if n < self.start or (self.horizon is not None and n > self.horizon):
            raise HorizonExceeded(n, self.start, self.horizon)

    def matrix(self, n: int) -> StochasticMatrix:
        self.check_range(n)
        return self._produce(n)

    def matrices(self, k: int, n: int) -> Iterator[StochasticMatrix]:
        """A_k, A_{k+1}, ..., A_{n-1}"""
        self.check_range(k)
        self.check_end(n)
        for m in range(k, n):
            yield self._produce(m)

    def resolve_horizon(self, requested: Optional[int]) -> int:
        if requested is None:
            if self.horizon is None:
                raise ValueError(f"chain '{self.name}' is unbounded; a horizon is required")
            return self.horizon
        self.check_end(requested)
        return requested

    @abstractmethod
    def _produce(self, n: int) -> StochasticMatrix:
        """Return A_n (range already checked)."""

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "order": self.order,
            "start": self.start,
            "horizon": self.horizon,
            "params": self.params,
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, order={self.order}, start={self.start}, horizon={self.horizon})"


class StaticChain(ChainSource):
    """A recorded finite list of matrices, A_start .. A_{start+len-1}."""

    def __init__(self, matrices: Sequence[StochasticMatrix], start: int = 0, **kwargs):
        if not matrices:
            raise ValueError("a static chain needs at least one matrix")
        order = matrices[0].order
        for m in matrices:
            if m.order != order:
                raise OrderMismatch(order, m.order)
        super().__init__(order, start=start, horizon=start + len(matrices), **kwargs)
        self._matrices = tuple(matrices)

    @property
    def kind(self) -> str:
        return "static-list"

    def _produce(self, n: int) -> StochasticMatrix:
        return self._matrices[n - self.start]


class ConstantChain(ChainSource):
    """A_n = A for every n >= start."""

    def __init__(self, matrix: StochasticMatrix, start: int = 0, horizon: Optional[int] = None, **kwargs):
        super().__init__(matrix.order, start=start, horizon=horizon, **kwargs)
        self._matrix = matrix

    def _produce(self, n: int) -> StochasticMatrix:
        return self._matrix


class GeneratorChain(ChainSource):
    """
    Chain defined by a producer ``n -> raw matrix``. Produced matrices are
    validated once and memoised in an LRU cache of ``cache_size`` steps, so
    producers must be deterministic in n.
    """

    def __init__(self,
                 order: int,
                 producer: Callable[[int], Any],
                 tol_row: Optional[float] = None,
                 cache_size: int = CHAIN_CACHE_SIZE,
                 **kwargs):
        super().__init__(order, **kwargs)
        self._producer = producer
        self._tol_row = tol_row
        self._cached = lru_cache(maxsize=cache_size)(self._build)

    def _build(self, n: int) -> StochasticMatrix:
        raw = self._producer(n)
        built = raw if isinstance(raw, StochasticMatrix) else validate(raw, self._tol_row)
        if built.order != self.order:
            raise OrderMismatch(self.order, built.order)
        return built

    def _produce(self, n: int) -> StochasticMatrix:
        return self._cached(n)


class SubChain(ChainSource):
    """Principal submatrix sequence of a parent chain on the given agents."""

    def __init__(self, parent: ChainSource, agents: Sequence[int], cache_size: int = CHAIN_CACHE_SIZE, **kwargs):
        agents = tuple(sorted(agents))
        kwargs.setdefault("name", f"{parent.name}[{','.join(str(a + 1) for a in agents)}]")
        edges = None
        if parent.unbounded_edges is not None:
            position = {a: p for p, a in enumerate(agents)}
            edges = frozenset(
                (position[i], position[j]) for i, j in parent.unbounded_edges
                if i in position and j in position
            )
        super().__init__(len(agents), start=parent.start, horizon=parent.horizon,
                         unbounded_edges=edges, **kwargs)
        self.parent = parent
        self.agents = agents
        self._index = np.array(agents, dtype=int)
        self._cached = lru_cache(maxsize=cache_size)(self._build)

    def _build(self, n: int) -> StochasticMatrix:
        full = self.parent.matrix(n).entries
        return validate(full[np.ix_(self._index, self._index)])

    def _produce(self, n: int) -> StochasticMatrix:
        return self._cached(n)


def record(chain: ChainSource, horizon: int, start: Optional[int] = None) -> StaticChain:
    """Materialise a chain up to ``horizon`` as a replayable static chain."""
    first = chain.start if start is None else start
    return StaticChain(
        list(chain.matrices(first, horizon)),
        start=first,
        name=chain.name,
        params=chain.params,
        unbounded_edges=chain.unbounded_edges,
    )
