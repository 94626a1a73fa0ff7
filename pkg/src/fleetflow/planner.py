"""One-step collision-free planning via priority inheritance with
backtracking, plus conflict accounting.

Agents are processed in descending priority. Each tries its candidate
cells (4 neighbors then wait, stable-sorted by distance to goal) and
reserves the first feasible one; an agent occupying a wanted cell is
planned recursively and may push the requester to its next candidate.
The result has no vertex collisions (next cells pairwise distinct) and
no swaps (no pair exchanges cells).

A conflict event is recorded when an agent's executed move differs
from its first-preference move, stamped at the agent's current cell.
"""

import math
from dataclasses import dataclass

from fleetflow.grid_map import UNREACHABLE

_INF = math.inf


@dataclass
class PlanStep:
    """Planner output: moves, conflict events, updated priorities."""

    next_pos: dict
    conflicts: list
    priorities: dict


def base_priority(agent, n_agents):
    """Tie-breaking fraction in [0, 1): lower ids rank higher."""
    return (n_agents - agent) / (n_agents + 1)


def plan_step(gmap, positions, goal_map, priorities, cache, t=0):
    """Plan one synchronized step for every agent in `positions`.

    positions must be collision-free and every agent must appear in
    goal_map. priorities carry integer progress plus the agent's base
    fraction; agents not at their goal gain +1 for the next step,
    agents at their goal reset to the fraction alone.
    """
    goals = goal_map.goals
    order = sorted(positions, key=lambda a: -priorities[a])
    occ_now = {}
    for a, v in positions.items():
        occ_now[v] = a
    occ_nxt = {}
    q_to = {a: None for a in positions}
    first_pref = {}

    def candidates(agent):
        pos = positions[agent]
        goal_cell = goals[agent].cell
        dist = cache.to_cell(goal_cell)
        neigh = [int(v) for v in gmap.neighbors(pos)]
        if dist[pos] == UNREACHABLE:
            # goal unreachable: prefer to stay put, but stay pushable
            return [pos] + neigh
        cand = neigh + [pos]
        cand.sort(key=lambda v: _INF if dist[v] == UNREACHABLE else int(dist[v]))
        return cand

    def pibt(agent):
        cand = candidates(agent)
        if agent not in first_pref:
            first_pref[agent] = cand[0]
        pos = positions[agent]
        for v in cand:
            if v in occ_nxt:
                continue
            j = occ_now.get(v)
            # swap: j already moving into our cell
            if j is not None and q_to[j] == pos:
                continue
            q_to[agent] = v
            occ_nxt[v] = agent
            # inheritance; a failed subtree re-reserves its own cell,
            # overwriting our claim on v, so no cleanup is needed here
            if j is not None and q_to[j] is None and not pibt(j):
                continue
            return True
        q_to[agent] = pos
        occ_nxt[pos] = agent
        return False

    for agent in order:
        if q_to[agent] is None:
            pibt(agent)

    conflicts = []
    next_pos = {}
    new_pri = {}
    for agent in sorted(positions):
        v = q_to[agent]
        next_pos[agent] = v
        if v != first_pref[agent]:
            conflicts.append((agent, positions[agent], t))
        frac = priorities[agent] - math.floor(priorities[agent])
        if v == goals[agent].cell:
            new_pri[agent] = frac
        else:
            new_pri[agent] = math.floor(priorities[agent]) + 1 + frac
    return PlanStep(next_pos=next_pos, conflicts=conflicts, priorities=new_pri)
