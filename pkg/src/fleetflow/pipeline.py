"""The flow scheduling pipeline: guidance distribution, integer
rebalancing flow, per-region matching, goal-map recovery.

Each step: count free agents per region (supplies), turn the desired
distribution into integer demands, solve the balanced transportation
problem over seed-to-seed distances, solve one local assignment per
region against the flow, and stitch the results into an injective goal
map. External guidance faults fall back to the proportional heuristic
for the step and are logged.
"""

import logging

import numpy as np

from fleetflow.aggregation import ORPHAN_REGION
from fleetflow.errors import (
    ConfigError,
    InfeasibleCost,
    ProtocolError,
    Timeout,
    WaypointExhausted,
)
from fleetflow.guidance import (
    Distribution,
    extract_features,
    external_guidance,
    free_agents,
    proportional_guidance,
    schedulable_free_agents,
    uniform_guidance,
)
from fleetflow.local_match import (
    Goal,
    GoalKind,
    GoalMap,
    build_region_problem,
    nearest_unused_cell,
    recover_goal_map,
    solve_assignment,
)
from fleetflow.rebalance import TransportInstance, round_distribution, solve_transport

log = logging.getLogger("fleetflow.pipeline")

GUIDANCE_MODES = ("proportional", "uniform", "external")


class FlowScheduler:
    """Region-flow scheduler over a fixed partition.

    guidance_mode selects the desired-distribution source; "external"
    requires a connected ExternalGuidanceClient. last_flow_cost exposes
    the most recent transport cost for logging.
    """

    name = "flow"

    def __init__(self, partition, cache, guidance_mode="proportional",
                 client=None, period=1000):
        if guidance_mode not in GUIDANCE_MODES:
            raise ConfigError(f"unknown guidance mode {guidance_mode!r}")
        if guidance_mode == "external" and client is None:
            raise ConfigError("external guidance needs a client")
        self.partition = partition
        self.cache = cache
        self.guidance_mode = guidance_mode
        self.client = client
        self.period = period
        self.last_flow_cost = 0
        self.fallbacks = 0

    def desired_distribution(self, state, extra=None):
        """The desired free-agent distribution for this step."""
        if self.guidance_mode == "uniform":
            return uniform_guidance(self.partition)
        if self.guidance_mode == "external":
            features = extract_features(
                state, self.partition, state.prev_goal_map,
                period=self.period, cache=self.cache,
            )
            try:
                return external_guidance(self.client, features, extra=extra)
            except (ProtocolError, Timeout) as exc:
                self.fallbacks += 1
                log.warning("external guidance failed (%s); using proportional", exc)
                return proportional_guidance(state, self.partition)
        return proportional_guidance(state, self.partition)

    def schedule(self, state, reserved=frozenset(), extra=None,
                 delta_override=None):
        """Produce goals for every free agent, avoiding reserved cells.

        delta_override, when given, replaces the configured guidance
        source for this step (the engine uses it in training mode,
        where it issues the external request itself).
        """
        self.last_flow_cost = 0
        all_free = free_agents(state)
        if not all_free:
            return GoalMap(goals={})
        sched = schedulable_free_agents(state, self.partition)
        if not sched:
            return self._all_stay(state, all_free, reserved)
        was_proportional = (
            delta_override is None and self.guidance_mode == "proportional"
        )
        if delta_override is not None:
            delta_d = delta_override
        else:
            delta_d = self.desired_distribution(state, extra=extra)
        goal_map = None
        try:
            goal_map = self._attempt(state, sched, delta_d, reserved)
        except (InfeasibleCost, WaypointExhausted) as exc:
            self.fallbacks += 1
            log.warning("flow attempt infeasible (%s); degrading", exc)
        if goal_map is None and not was_proportional:
            try:
                goal_map = self._attempt(
                    state, sched, proportional_guidance(state, self.partition),
                    reserved,
                )
            except (InfeasibleCost, WaypointExhausted) as exc:
                self.fallbacks += 1
                log.warning("proportional fallback infeasible (%s)", exc)
        if goal_map is None:
            # the identity distribution keeps every region's demand on
            # its own supply: the flow is diagonal, no placeholders are
            # created, and the attempt cannot fail, so the episode
            # keeps its safety contract on degenerate partitions
            goal_map = self._attempt(
                state, sched, self._identity_distribution(state, sched),
                reserved,
            )
        self._add_orphan_stays(state, all_free, sched, goal_map, reserved)
        return goal_map

    def _identity_distribution(self, state, sched):
        counts = np.zeros(self.partition.n_regions, dtype=np.int64)
        for a in sched:
            counts[self.partition.region_of[state.positions[a]]] += 1
        return Distribution(probs=counts / counts.sum())

    def _attempt(self, state, sched, delta_d, reserved):
        partition = self.partition
        k = partition.n_regions
        supplies = np.zeros(k, dtype=np.int64)
        for a in sched:
            supplies[partition.region_of[state.positions[a]]] += 1
        demands = round_distribution(delta_d, len(sched))
        flow = solve_transport(
            TransportInstance(
                supplies=supplies, demands=demands, costs=partition.region_dist
            )
        )
        self.last_flow_cost = flow.cost
        matchings = {}
        inbound = flow.y.sum(axis=0)
        for i in range(k):
            if supplies[i] == 0 and inbound[i] - flow.y[i, i] == 0:
                continue
            prob = build_region_problem(
                i, flow, state, partition, self.cache, reserved
            )
            matchings[i] = (prob, solve_assignment(prob))
        return recover_goal_map(
            matchings, flow, state, partition, self.cache, reserved
        )

    def _all_stay(self, state, agents, reserved):
        goals = {}
        used = set(reserved)
        for agent in sorted(agents):
            cell = nearest_unused_cell(
                self.cache.gmap, self.cache, state.positions[agent], used
            )
            used.add(cell)
            kind = GoalKind.STAY if cell == state.positions[agent] else GoalKind.WAYPOINT
            goals[agent] = Goal(cell=cell, kind=kind)
        return GoalMap(goals=goals)

    def _add_orphan_stays(self, state, all_free, sched, goal_map, reserved):
        orphans = [a for a in all_free if a not in goal_map.goals]
        if not orphans:
            return
        used = set(reserved) | goal_map.cells()
        for agent in sorted(orphans):
            cell = nearest_unused_cell(
                self.cache.gmap, self.cache, state.positions[agent], used
            )
            used.add(cell)
            kind = GoalKind.STAY if cell == state.positions[agent] else GoalKind.WAYPOINT
            goal_map.goals[agent] = Goal(cell=cell, kind=kind)
