"""
Tests for trajectories, the Lyapunov series and cluster detection.
"""

import math

import numpy as np
import pytest

from chainlab.core.chain import ConstantChain
from chainlab.core.dynamics import (
    step, trajectory, lyapunov_series, check_S_monotonic, detect_clusters, tail_oscillation,
    increment_lower_bounds,
)
from chainlab.core.properties import certify_chain
from chainlab.core.stochastic import validate
from chainlab.core.zoo import example_chain, random_doubly_stochastic_chain, krause_chain
from chainlab.data.errors import InfiniteM, OrderMismatch, HorizonExceeded
from chainlab.data.models import KrauseParams
from tests.conftest import random_stochastic_chain


class TestStep:
    """Test cases for step and trajectory."""

    def test_identity(self):
        assert np.array_equal(step(validate(np.eye(3)), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_averaging(self):
        assert np.array_equal(step(validate([[0.5, 0.5], [0.5, 0.5]]), [0.0, 1.0]), [0.5, 0.5])

    def test_swap(self):
        assert np.array_equal(step(validate([[0.0, 1.0], [1.0, 0.0]]), [0.0, 1.0]), [1.0, 0.0])

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            step(validate(np.eye(2)), [1.0, 2.0, 3.0])

    def test_identity_trajectory_is_constant(self, identity_chain):
        traj = trajectory(identity_chain, [3.0, 1.0, 2.0], 0, 5)

        assert np.all(traj.states == [3.0, 1.0, 2.0])
        assert traj.horizon == 5
        assert traj.L == 2.0

    def test_swap_oscillates(self, swap_chain):
        traj = trajectory(swap_chain, [0.0, 1.0], 0, 6)

        assert np.array_equal(traj.state(1), [1.0, 0.0])
        assert np.array_equal(traj.state(2), [0.0, 1.0])
        assert np.all(traj.z[:, 0] == 0.0)
        assert np.all(traj.z[:, 1] == 1.0)

    def test_inv_n_consensus(self):
        traj = trajectory(example_chain("inv_n"), [0.0, 1.0], 1, 500)

        final = traj.state(500)
        assert abs(final[0] - final[1]) < 1e-6

    def test_sorted_view_breaks_ties_by_agent(self, identity_chain):
        traj = trajectory(identity_chain, [1.0, 0.0, 1.0], 0, 2)

        view = traj.sorted_view(1)
        assert view.perm.tolist() == [1, 0, 2]
        assert view.z.tolist() == [0.0, 1.0, 1.0]

    def test_convexity_bounds(self):
        rng = np.random.default_rng(17)
        chain = random_stochastic_chain(rng, 5, 40)
        traj = trajectory(chain, rng.normal(size=5), 0, 40)

        assert np.all(np.diff(traj.z[:, 0]) >= -1e-12)
        assert np.all(np.diff(traj.z[:, -1]) <= 1e-12)

    def test_horizon_exceeded(self, swap_chain):
        short = ConstantChain(validate(np.eye(2)), horizon=5)

        with pytest.raises(HorizonExceeded):
            trajectory(short, [0.0, 1.0], 0, 6)

    def test_requires_a_step(self, swap_chain):
        with pytest.raises(ValueError):
            trajectory(swap_chain, [0.0, 1.0], 3, 3)


class TestLyapunovSeries:
    """Test cases for lyapunov_series and check_S_monotonic."""

    def test_consensus_from_start(self, averaging_chain):
        traj = trajectory(averaging_chain, [0.3, 0.3], 0, 10)

        series = lyapunov_series(traj, 2, 1.0)

        assert traj.L == 0.0
        assert np.allclose(series.values, 0.3 * (0.5 + 0.25))
        assert np.allclose(series.increments, 0.0)

    def test_doubly_stochastic_two_agents(self):
        chain = random_doubly_stochastic_chain(seed=3, s=2, N=50)
        traj = trajectory(chain, [0.0, 1.0], 0, 50)

        series = lyapunov_series(traj, 2, 1.0)

        assert series.K == 2.0
        assert np.allclose(series.values, traj.z[:, 0] / 2 + traj.z[:, 1] / 4)
        assert np.all(series.increments >= -1e-10)

    def test_reconstruct_round_trip(self):
        rng = np.random.default_rng(4)
        chain = random_stochastic_chain(rng, 4, 30)
        traj = trajectory(chain, rng.normal(size=4), 0, 30)
        mprime = np.concatenate([[0.0], np.cumsum(rng.random(30) * 0.01)])

        series = lyapunov_series(traj, 3, 1.5, mprime)

        assert np.allclose(series.reconstruct(), traj.z, atol=1e-9)

    def test_infinite_M(self, swap_chain):
        traj = trajectory(swap_chain, [0.0, 1.0], 0, 4)

        with pytest.raises(InfiniteM):
            lyapunov_series(traj, 1, math.inf)

    def test_rejects_bad_inputs(self, swap_chain):
        traj = trajectory(swap_chain, [0.0, 1.0], 0, 4)

        with pytest.raises(ValueError):
            lyapunov_series(traj, 3, 1.0)
        with pytest.raises(ValueError):
            lyapunov_series(traj, 1, 0.5)
        with pytest.raises(ValueError):
            lyapunov_series(traj, 1, 1.0, mprime=[0.0, 0.2, 0.1, 0.3, 0.4])
        with pytest.raises(ValueError):
            lyapunov_series(traj, 1, 1.0, mprime=[0.0, 0.1])

    def test_inv_n_monotonic(self):
        chain = example_chain("inv_n")
        traj = trajectory(chain, [0.0, 1.0], 1, 200)
        for r in (1, 2):
            series = lyapunov_series(traj, r, 1.0)
            assert check_S_monotonic(series, traj, chain) == []

    def test_identity_has_no_violations(self, identity_chain):
        traj = trajectory(identity_chain, [0.0, 0.5, 1.0], 0, 10)
        series = lyapunov_series(traj, 3, 1.0)

        assert check_S_monotonic(series, traj, identity_chain) == []
        assert np.all(series.increments == 0.0)

    def test_non_balanced_with_forced_constant_violates(self, non_balanced_chain):
        traj = trajectory(non_balanced_chain, [0.0, 1.0], 0, 20)

        # S_1 tracks the minimum, which never decreases; S_2 drops at the first step
        series = lyapunov_series(traj, 2, 1.0)

        assert 0 in check_S_monotonic(series, traj, non_balanced_chain)

    def test_lower_bounds_stored_with_nominal(self, averaging_chain):
        traj = trajectory(averaging_chain, [0.0, 1.0], 0, 3)

        series = lyapunov_series(traj, 2, 1.0, nominal=averaging_chain)

        assert series.lower_bound_increments.shape == (3,)
        # rank 2 receives 1/2 of rank 1's value over the gap 1, scaled by K^-s = 1/4
        assert series.lower_bound_increments[0] == pytest.approx(0.125)
        assert np.array_equal(series.lower_bound_increments,
                              increment_lower_bounds(traj, averaging_chain, 2.0, 2))


class TestTheoremOneSuite:
    """Sorted coordinates settle on doubly stochastic chains."""

    SEEDS = range(100)
    HORIZON = 2000

    @classmethod
    def simulate(cls, seed):
        order = 2 + seed % 5
        chain = random_doubly_stochastic_chain(seed=seed, s=order, N=cls.HORIZON)
        traj = trajectory(chain, np.random.default_rng(seed).random(order), 0, cls.HORIZON)
        return order, chain, traj

    @pytest.mark.slow
    def test_tail_oscillation_vanishes(self):
        for seed in self.SEEDS:
            _, _, traj = self.simulate(seed)
            assert np.all(tail_oscillation(traj, 0.1) < 1e-6), seed

    @pytest.mark.slow
    def test_series_never_drops_below_increment_bound(self):
        for seed in self.SEEDS:
            order, chain, traj = self.simulate(seed)
            M = certify_chain(chain, self.HORIZON).chain_M
            for r in range(1, order + 1):
                series = lyapunov_series(traj, r, M, nominal=chain)
                bounds = increment_lower_bounds(traj, chain, series.K, r)
                assert bounds.shape == (self.HORIZON,)
                assert np.all(series.increments >= bounds - 1e-10), (seed, r)
                assert check_S_monotonic(series, traj, chain, 1e-10) == [], (seed, r)


class TestDetectClusters:
    """Test cases for detect_clusters."""

    def test_krause_two_groups(self):
        params = KrauseParams(x0=[0.0, 0.2, 0.4, 0.6, 3.6, 3.8, 4.0, 4.2], radius=1.0)
        _, traj = krause_chain(params, 50)

        report = detect_clusters(traj, 1e-8, 10)

        assert report.verdict == "multiple-consensus"
        assert report.clusters == (frozenset(range(4)), frozenset(range(4, 8)))
        assert report.accumulation_points == 2

    def test_swap_unsettled(self, swap_chain):
        traj = trajectory(swap_chain, [0.0, 1.0], 0, 1000)

        report = detect_clusters(traj, 1e-8, 10)

        assert report.verdict == "unsettled"
        assert len(report.clusters) == 2

    def test_inv_n_consensus(self):
        traj = trajectory(example_chain("inv_n"), [0.0, 1.0], 1, 500)

        report = detect_clusters(traj, 1e-6, 10)

        assert report.verdict == "consensus"
        assert report.limits[0] == pytest.approx(report.limits[-1], abs=1e-6)

    def test_window_must_fit(self, swap_chain):
        traj = trajectory(swap_chain, [0.0, 1.0], 0, 5)

        with pytest.raises(ValueError):
            detect_clusters(traj, 1e-8, 6)

    def test_default_window_from_settings(self, identity_chain, reset_settings):
        reset_settings.set("cluster_window", 3)
        traj = trajectory(identity_chain, [0.0, 0.5, 1.0], 0, 5)

        report = detect_clusters(traj)

        assert report.window == 3
        assert report.verdict == "multiple-consensus"
        assert report.accumulation_points == 3
