"""Largest-remainder rounding and the balanced transportation solver."""

import numpy as np
import pytest

from fleetflow.errors import InfeasibleCost, Unbalanced
from fleetflow.grid_map import UNREACHABLE
from fleetflow.rebalance import (
    Flow,
    TransportInstance,
    instance_from_state,
    round_distribution,
    solve_transport,
)

from test_kernels import enumerate_transport_min, random_balanced_instance


class TestRoundDistribution:
    def test_remainder_tie_to_lowest_index(self):
        # 10 * [0.25, 0.25, 0.5] floors to [2, 2, 5]; remainders
        # (.5, .5, 0) leave one unit, tie broken toward index 0
        out = round_distribution(np.array([0.25, 0.25, 0.5]), 10)
        assert out.tolist() == [3, 2, 5]

    def test_degenerate_mass(self):
        out = round_distribution(np.array([1.0, 0.0, 0.0]), 7)
        assert out.tolist() == [7, 0, 0]

    def test_thirds(self):
        out = round_distribution(np.array([1 / 3, 1 / 3, 1 / 3]), 2)
        assert out.tolist() == [1, 1, 0]

    def test_accepts_distribution_object(self):
        from fleetflow.guidance import Distribution

        out = round_distribution(Distribution([0.5, 0.5]), 3)
        assert out.tolist() == [2, 1]

    def test_zero_agents(self):
        out = round_distribution(np.array([0.3, 0.7]), 0)
        assert out.tolist() == [0, 0]

    def test_sum_property(self, rng):
        for _ in range(200):
            k = int(rng.integers(1, 8))
            raw = rng.random(k)
            probs = raw / raw.sum()
            n = int(rng.integers(0, 50))
            out = round_distribution(probs, n)
            assert out.sum() == n
            assert (out >= 0).all()
            # each entry within 1 of its exact share
            assert np.all(np.abs(out - probs * n) < 1.0 + 1e-9)


class TestSolveTransport:
    def test_single_route(self):
        inst = TransportInstance([2, 0], [0, 2], [[0, 3], [3, 0]])
        flow = solve_transport(inst)
        assert flow.y.tolist() == [[0, 2], [0, 0]]
        assert flow.cost == 6

    def test_two_suppliers_one_sink(self):
        inst = TransportInstance(
            [1, 1, 0], [0, 0, 2],
            [[0, 9, 5], [9, 0, 2], [5, 2, 0]],
        )
        flow = solve_transport(inst)
        assert flow.cost == 7
        assert flow.y[:, 2].tolist() == [1, 1, 0]

    def test_identity_when_balanced(self, rng):
        for _ in range(20):
            k = int(rng.integers(1, 6))
            counts = rng.integers(0, 5, size=k)
            dist = rng.integers(1, 9, size=(k, k))
            np.fill_diagonal(dist, 0)
            inst = TransportInstance(counts, counts.copy(), dist)
            flow = solve_transport(inst)
            assert flow.cost == 0
            assert np.array_equal(np.diag(flow.y), counts)

    def test_unbalanced_rejected(self):
        inst = TransportInstance([2], [1], [[0]])
        with pytest.raises(Unbalanced):
            solve_transport(inst)

    def test_negative_entry_rejected(self):
        inst = TransportInstance([-1, 2], [1, 0], [[0, 1], [1, 0]])
        with pytest.raises(Unbalanced):
            solve_transport(inst)

    def test_infeasible_names_regions(self):
        costs = [[0, UNREACHABLE], [UNREACHABLE, 0]]
        inst = TransportInstance([1, 0], [0, 1], costs)
        with pytest.raises(InfeasibleCost) as err:
            solve_transport(inst)
        assert "region 1" in str(err.value)
        assert "region 0" in str(err.value)

    def test_matches_enumeration(self, rng):
        for _ in range(60):
            supplies, demands, costs = random_balanced_instance(rng)
            inst = TransportInstance(supplies, demands, costs)
            want = enumerate_transport_min(supplies, demands, costs)
            if want is None:
                with pytest.raises(InfeasibleCost):
                    solve_transport(inst)
            else:
                assert solve_transport(inst).cost == want

    def test_conservation(self, rng):
        for _ in range(40):
            supplies, demands, costs = random_balanced_instance(rng)
            if enumerate_transport_min(supplies, demands, costs) is None:
                continue
            flow = solve_transport(TransportInstance(supplies, demands, costs))
            assert np.array_equal(flow.y.sum(axis=1), supplies)
            assert np.array_equal(flow.y.sum(axis=0), demands)
            assert (flow.y >= 0).all()

    def test_zero_total(self):
        inst = TransportInstance([0, 0], [0, 0], [[0, 1], [1, 0]])
        flow = solve_transport(inst)
        assert flow.cost == 0
        assert flow.y.sum() == 0


class TestInstanceFromState:
    def test_passthrough(self):
        dist = np.array([[0, 4], [4, 0]], dtype=np.int64)
        inst = instance_from_state([3, 1], [2, 2], dist)
        assert inst.supplies.tolist() == [3, 1]
        assert inst.demands.tolist() == [2, 2]
        assert inst.costs.tolist() == dist.tolist()
        assert isinstance(solve_transport(inst), Flow)
