"""
Tests for the chain certificates: balanced asymmetry, cut-balance,
self-confidence, doubly stochastic test and l1 distance.
"""

import math
from itertools import combinations

import numpy as np
import pytest

from chainlab.core.chain import ConstantChain, StaticChain
from chainlab.core.properties import (
    balanced_asymmetry_constant, cut_balance_constant, self_confidence, is_doubly_stochastic,
    certify_chain, l1_distance,
)
from chainlab.core.stochastic import validate
from chainlab.core.zoo import example_chain, random_doubly_stochastic_chain, krause_chain
from chainlab.data.errors import OrderTooLarge, OrderMismatch
from chainlab.data.models import DivergenceRule, KrauseParams
from tests.conftest import random_stochastic_chain, geometric_chain


def oracle_balanced_constant(entries: np.ndarray) -> float:
    """Direct double loop over subset pairs, largest cardinality first."""
    s = entries.shape[0]
    agents = range(s)
    best = 1.0
    for c in range(s - 1, 0, -1):
        subsets = [set(t) for t in combinations(reversed(agents), c)]
        for s2 in subsets:
            for s1 in subsets:
                left = sum(entries[i, j] for i in s1 for j in agents if j not in s2)
                right = sum(entries[i, j] for i in agents if i not in s1 for j in s2)
                if left > 0 and right == 0:
                    return math.inf
                if left > 0:
                    best = max(best, left / right)
    return best


def self_confident_matrix(rng, order: int, delta: float) -> np.ndarray:
    raw = rng.random((order, order))
    raw = raw / raw.sum(axis=1, keepdims=True) * (1.0 - delta)
    raw[np.diag_indices(order)] += delta
    return raw


class TestBalancedAsymmetry:
    """Test cases for balanced_asymmetry_constant."""

    def test_doubly_stochastic_has_unit_constant(self):
        chain = random_doubly_stochastic_chain(seed=4, s=4, N=10, mix=3)
        for matrix in chain.matrices(0, 10):
            assert balanced_asymmetry_constant(matrix).value <= 1.0 + 1e-12

    def test_non_balanced_is_infinite(self):
        witness = balanced_asymmetry_constant(validate([[0.5, 0.5], [1.0, 0.0]]))

        assert witness.value == math.inf
        assert witness.s1 == frozenset({0})
        assert witness.s2 == frozenset({1})
        assert witness.to_dict() == {"value": "inf", "S1": [1], "S2": [2]}

    def test_swap_is_one(self):
        assert balanced_asymmetry_constant(validate([[0.0, 1.0], [1.0, 0.0]])).value == 1.0

    def test_identity_imposes_nothing(self):
        witness = balanced_asymmetry_constant(validate(np.eye(3)))

        assert witness.value == 1.0
        assert witness.s1 is None

    def test_single_agent(self):
        assert balanced_asymmetry_constant(validate([[1.0]])).value == 1.0

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(2024)
        for trial in range(60):
            order = 2 + trial % 3
            raw = rng.random((order, order))
            # Sparse patterns exercise the zero-side conventions
            raw[rng.random((order, order)) < 0.3] = 0.0
            np.fill_diagonal(raw, raw.diagonal() + 0.1)
            matrix = validate(raw / raw.sum(axis=1, keepdims=True))
            expected = oracle_balanced_constant(matrix.entries)
            got = balanced_asymmetry_constant(matrix).value
            if math.isinf(expected):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(expected, rel=1e-12)

    def test_dominates_cut_balance(self):
        rng = np.random.default_rng(8)
        for matrix in random_stochastic_chain(rng, 4, 20).matrices(0, 20):
            assert balanced_asymmetry_constant(matrix).value >= cut_balance_constant(matrix).value

    def test_self_confidence_bound(self):
        rng = np.random.default_rng(31)
        for trial in range(30):
            order = 2 + trial % 5
            delta = 0.05 + 0.3 * rng.random() / order
            matrix = validate(self_confident_matrix(rng, order, delta))
            K = cut_balance_constant(matrix).value
            M = balanced_asymmetry_constant(matrix).value
            assert M <= max(K, (order - 1) / delta) * (1 + 1e-12)

    def test_order_limit(self):
        with pytest.raises(OrderTooLarge):
            balanced_asymmetry_constant(validate(np.eye(5)), max_order=4)


class TestCutBalance:
    """Test cases for cut_balance_constant."""

    def test_symmetric_matrix(self):
        assert cut_balance_constant(validate([[0.2, 0.3, 0.5], [0.3, 0.4, 0.3], [0.5, 0.3, 0.2]])).value == 1.0

    def test_non_balanced_example(self):
        witness = cut_balance_constant(validate([[0.5, 0.5], [1.0, 0.0]]))

        assert witness.value == pytest.approx(2.0)
        assert witness.s1 == witness.s2 == frozenset({1})

    def test_krause_matrices_bounded_by_order(self):
        params = KrauseParams(x0=[0.0, 0.3, 0.7, 1.2, 1.5], radius=0.8)
        chain, _ = krause_chain(params, 30)
        for matrix in chain.matrices(0, 30):
            assert cut_balance_constant(matrix).value <= params.order + 1e-12


class TestSelfConfidence:
    """Test cases for self_confidence and is_doubly_stochastic."""

    def test_identity(self, identity_chain):
        assert self_confidence(identity_chain, 5) == 1.0

    def test_swap(self, swap_chain):
        assert self_confidence(swap_chain, 5) == 0.0

    def test_krause_at_least_one_over_s(self):
        params = KrauseParams(x0=[0.0, 0.3, 0.7, 1.2, 1.5], radius=0.8)
        chain, _ = krause_chain(params, 30)

        assert self_confidence(chain, 30) >= 1.0 / params.order - 1e-12

    def test_requires_a_step(self, swap_chain):
        with pytest.raises(ValueError):
            self_confidence(swap_chain, 0)

    def test_doubly_stochastic(self):
        assert is_doubly_stochastic(validate([[0.5, 0.5], [0.5, 0.5]]))
        assert not is_doubly_stochastic(validate([[0.5, 0.5], [1.0, 0.0]]))

    def test_birkhoff_combinations(self):
        chain = random_doubly_stochastic_chain(seed=1, s=5, N=20, mix=4)
        assert all(is_doubly_stochastic(m) for m in chain.matrices(0, 20))


class TestCertifyChain:
    """Test cases for certify_chain."""

    def test_swap_certificate(self, swap_chain):
        report = certify_chain(swap_chain, 5)

        assert report.chain_M == 1.0
        assert report.chain_K == 1.0
        assert report.delta == 0.0
        assert report.all_doubly_stochastic
        assert len(report.records()) == 5

    def test_inv_n_certificate(self):
        report = certify_chain(example_chain("inv_n"), 50)

        assert report.start == 1
        assert report.chain_M <= 1.0 + 1e-12
        assert report.all_doubly_stochastic

    def test_non_balanced_certificate(self):
        report = certify_chain(example_chain("non_balanced"), 3)

        assert report.chain_M == math.inf
        assert report.worst_step() == 0
        assert report.to_dict()["chain_M"] == "inf"

    def test_chain_constants_are_suprema(self):
        rng = np.random.default_rng(12)
        report = certify_chain(random_stochastic_chain(rng, 3, 15), 15)

        assert report.chain_M == max(report.per_step_M)
        assert all(report.chain_M >= m for m in report.per_step_M)

    def test_delta_running_is_non_increasing(self):
        rng = np.random.default_rng(13)
        report = certify_chain(random_stochastic_chain(rng, 3, 15), 15)

        assert np.all(np.diff(report.delta_running) <= 0)
        assert report.delta_running[-1] == report.delta


class TestL1Distance:
    """Test cases for l1_distance."""

    def test_chain_against_itself(self, swap_chain):
        distance = l1_distance(swap_chain, swap_chain, 10)

        assert distance.total == 0.0
        assert np.all(distance.cumulative == 0.0)

    def test_geometric_difference_has_finite_limit(self):
        identity = ConstantChain(validate(np.eye(2)))

        distance = l1_distance(geometric_chain(), identity, 60)

        assert distance.total < 1.0 + 1e-12
        assert distance.trend(DivergenceRule()) == "bounded"

    def test_constant_gap_diverges(self):
        a = ConstantChain(validate([[0.6, 0.4], [0.4, 0.6]]))
        b = ConstantChain(validate([[0.5, 0.5], [0.5, 0.5]]))

        distance = l1_distance(a, b, 100)

        assert distance.total == pytest.approx(10.0)
        assert distance.trend(DivergenceRule()) == "divergent-trend"

    def test_cumulative_starts_at_zero_and_grows(self):
        rng = np.random.default_rng(21)
        a, b = random_stochastic_chain(rng, 3, 20), random_stochastic_chain(rng, 3, 20)

        distance = l1_distance(a, b, 20)

        assert distance.cumulative[0] == 0.0
        assert np.all(np.diff(distance.cumulative) >= 0)

    def test_symmetric_and_triangle(self):
        rng = np.random.default_rng(22)
        a, b, c = (random_stochastic_chain(rng, 3, 10) for _ in range(3))

        ab, ba = l1_distance(a, b, 10), l1_distance(b, a, 10)
        ac, bc = l1_distance(a, c, 10), l1_distance(b, c, 10)

        assert np.array_equal(ab.per_step, ba.per_step)
        assert np.all(ac.per_step <= ab.per_step + bc.per_step + 1e-15)

    def test_order_mismatch(self, swap_chain, identity_chain):
        with pytest.raises(OrderMismatch):
            l1_distance(swap_chain, identity_chain, 5)

    def test_common_start(self):
        a = example_chain("inv_n")
        b = StaticChain([validate(np.eye(2))] * 10)

        distance = l1_distance(a, b, 10)

        assert distance.start == 1
        assert len(distance.per_step) == 9
