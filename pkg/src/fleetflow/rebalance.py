"""Integer rebalancing: rounding the desired distribution and solving
the balanced transportation problem over regions.

Supplies are the per-region free-agent counts; demands come from
largest-remainder rounding of the desired distribution. The solver
returns a minimum-cost integral flow whose row sums match supplies and
column sums match demands.
"""

import numpy as np

from fleetflow import kernels
from fleetflow.errors import InfeasibleCost, Unbalanced
from fleetflow.grid_map import UNREACHABLE


class TransportInstance:
    """Balanced integer transportation instance.

    costs uses the UNREACHABLE sentinel for unusable routes. Validation
    happens in solve_transport so partially built instances can be
    inspected.
    """

    def __init__(self, supplies, demands, costs):
        self.supplies = np.ascontiguousarray(supplies, dtype=np.int64)
        self.demands = np.ascontiguousarray(demands, dtype=np.int64)
        self.costs = np.ascontiguousarray(costs, dtype=np.int64)


class Flow:
    """Integral region-to-region flow with its total cost."""

    def __init__(self, y, cost):
        self.y = y
        self.cost = cost


def round_distribution(delta, n):
    """Largest-remainder rounding of n * delta to integers summing to n.

    Floors every entry, then hands the leftover units to entries by
    descending fractional part, ties to the lowest index.
    """
    probs = np.asarray(getattr(delta, "probs", delta), dtype=np.float64)
    k = probs.shape[0]
    scaled = probs * n
    base = np.floor(scaled).astype(np.int64)
    remainder = int(n - base.sum())
    assert remainder >= 0, "distribution sums above 1 beyond tolerance"
    if remainder:
        fracs = scaled - base
        order = np.lexsort((np.arange(k), -fracs))
        i = 0
        while remainder > 0:
            base[order[i % k]] += 1
            remainder -= 1
            i += 1
    return base


def solve_transport(inst):
    """Minimum-cost integral flow for a balanced instance.

    Successive shortest paths with potentials on the bipartite region
    graph; deterministic tie-breaking, O(k^3) for k regions. Raises
    Unbalanced on sum mismatch and InfeasibleCost when some demanded
    region is unreachable from every remaining supplier.
    """
    supplies = inst.supplies
    demands = inst.demands
    costs = inst.costs
    if supplies.sum() != demands.sum():
        raise Unbalanced(
            f"supply {int(supplies.sum())} != demand {int(demands.sum())}"
        )
    if np.any(supplies < 0) or np.any(demands < 0):
        raise Unbalanced("negative supply or demand entry")
    y, total, bad = kernels.transport(costs, supplies, demands)
    if bad >= 0:
        sent = y.sum(axis=1)
        offender = next(
            (i for i in range(supplies.shape[0]) if supplies[i] - sent[i] > 0),
            -1,
        )
        raise InfeasibleCost(
            f"demand region {bad} unreachable from supplying region {offender}"
        )
    assert np.array_equal(y.sum(axis=1), supplies), "row sums != supplies"
    assert np.array_equal(y.sum(axis=0), demands), "column sums != demands"
    return Flow(y=y, cost=int(total))


def instance_from_state(free_counts, demands, region_dist):
    """Assemble the instance used by the scheduling pipeline."""
    return TransportInstance(
        supplies=free_counts, demands=demands, costs=region_dist
    )


__all__ = [
    "TransportInstance",
    "Flow",
    "round_distribution",
    "solve_transport",
    "instance_from_state",
    "UNREACHABLE",
]
