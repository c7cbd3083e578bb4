"""
Exception hierarchy for chainlab.
Value-shaped failures also derive from ValueError so callers that only
know the standard library can still catch them.
"""

from typing import Optional


class ChainLabError(Exception):
    """Root of all chainlab errors"""


class NotSquare(ChainLabError, ValueError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"matrix must be square, got shape {self.shape}")


class NegativeEntry(ChainLabError, ValueError):
    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative entry a[{i},{j}] = {value!r}")


class NonFiniteEntry(ChainLabError, ValueError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"non-finite entry a[{i},{j}]")


class RowSumViolation(ChainLabError, ValueError):
    def __init__(self, i: int, total: float):
        self.i, self.total = i, total
        super().__init__(f"row {i} sums to {total!r}, not 1")


class OrderMismatch(ChainLabError, ValueError):
    def __init__(self, expected: int, got: int):
        self.expected, self.got = expected, got
        super().__init__(f"order mismatch: expected {expected}, got {got}")


class OrderTooLarge(ChainLabError, ValueError):
    def __init__(self, order: int, limit: int, what: str = "enumeration"):
        self.order, self.limit = order, limit
        super().__init__(f"order {order} exceeds the {what} limit of {limit}")


class BudgetExceeded(ChainLabError, ValueError):
    def __init__(self, needed: float, budget: float, what: str = "enumeration"):
        self.needed, self.budget = needed, budget
        super().__init__(f"{what} needs {needed:.3g} items, budget is {budget:.3g}")


class HorizonExceeded(ChainLabError, ValueError):
    def __init__(self, requested: int, first: int, horizon: Optional[int]):
        self.requested, self.first, self.horizon = requested, first, horizon
        super().__init__(
            f"index {requested} outside chain range [{first}, {horizon if horizon is not None else 'inf'})"
        )


class InconsistentClustering(ChainLabError):
    def __init__(self, i: int, j: int, distance: float, tolerance: float):
        self.i, self.j, self.distance = i, j, distance
        super().__init__(
            f"rows {i} and {j} share a cluster but differ by {distance:.3g} >= {tolerance:.3g}"
        )


class InfiniteM(ChainLabError, ValueError):
    def __init__(self):
        super().__init__("balanced-asymmetry constant is infinite; Lyapunov series undefined")


class KernelBoundViolated(ChainLabError, ValueError):
    def __init__(self, sup_f: float, order: int):
        self.sup_f, self.order = sup_f, order
        super().__init__(f"sup f = {sup_f!r} must be < 1/s = {1.0 / order!r}")


class QuadratureFailure(ChainLabError):
    pass


class ManifestError(ChainLabError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"manifest field '{field}': {message}")


class MissingArtifact(ChainLabError):
    def __init__(self, theorem: str, artifact: str):
        self.theorem, self.artifact = theorem, artifact
        super().__init__(f"cross-check {theorem} needs the '{artifact}' analysis")


class ReportIoError(ChainLabError, OSError):
    pass
