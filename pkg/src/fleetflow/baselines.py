"""Reference schedulers: nearest-task greedy and global optimal matching.

Both operate on the same free-agent and candidate-task semantics as
the flow pipeline, so the --no-reassign switch and goal-cell
reservations behave identically across schedulers.
"""

import numpy as np

from fleetflow.grid_map import UNREACHABLE
from fleetflow.guidance import free_agents
from fleetflow.local_match import (
    AgentRow,
    Goal,
    GoalKind,
    GoalMap,
    LocalProblem,
    TaskCol,
    candidate_tasks,
    nearest_unused_cell,
    solve_assignment,
)


def _finish_with_stays(goals, leftover, state, gmap, cache, used):
    """Give remaining agents stay goals, bumping off contested cells."""
    for agent in sorted(leftover):
        pos = state.positions[agent]
        cell = nearest_unused_cell(gmap, cache, pos, used)
        used.add(cell)
        if cell == pos:
            goals[agent] = Goal(cell=cell, kind=GoalKind.STAY)
        else:
            goals[agent] = Goal(cell=cell, kind=GoalKind.WAYPOINT)
    return goals


def greedy_schedule(state, cache, reserved=frozenset()):
    """Each free agent takes the nearest candidate task, in id order.

    Ties go to the lowest task id; agents left without a reachable
    task stay in place. Goal cells never collide with `reserved`.
    """
    gmap = cache.gmap
    agents = free_agents(state)
    tasks = candidate_tasks(state, reserved)
    available = {t.id: t for t in tasks}
    goals = {}
    used = set(reserved)
    leftover = []
    for agent in agents:
        pos = state.positions[agent]
        best = None
        best_d = None
        for tid in sorted(available):
            task = available[tid]
            d = cache.dist(pos, task.current_errand)
            if d == UNREACHABLE:
                continue
            if best_d is None or d < best_d:
                best = task
                best_d = d
        if best is None:
            leftover.append(agent)
            continue
        del available[best.id]
        cell = best.current_errand
        goals[agent] = Goal(cell=cell, kind=GoalKind.TASK, task_id=best.id)
        used.add(cell)
    return GoalMap(goals=_finish_with_stays(goals, leftover, state, gmap, cache, used))


def gopt_schedule(state, cache, reserved=frozenset()):
    """Global minimum-cost matching of all free agents to candidate tasks.

    Unreachable pairs are never matched; surplus agents stay. Uses the
    same padded assignment solver as the regional pipeline, so
    tie-breaking is shared.
    """
    gmap = cache.gmap
    agents = free_agents(state)
    tasks = candidate_tasks(state, reserved)
    rows = [AgentRow(agent=a, cell=state.positions[a]) for a in agents]
    cols = [TaskCol(task_id=t.id, cell=t.current_errand) for t in tasks]
    cost = np.empty((len(rows), len(cols)), dtype=np.int64)
    for r, row in enumerate(rows):
        for c, col in enumerate(cols):
            cost[r, c] = cache.dist(row.cell, col.cell)
    prob = LocalProblem(
        region=-1, rows=rows, cols=cols, cost=cost, forbidden=set(),
        kappa=min(len(rows), len(cols)),
    )
    pairs = solve_assignment(prob)
    goals = {}
    used = set(reserved)
    matched = set()
    for r, c in pairs:
        row = rows[r]
        col = cols[c]
        goals[row.agent] = Goal(cell=col.cell, kind=GoalKind.TASK, task_id=col.task_id)
        used.add(col.cell)
        matched.add(row.agent)
    leftover = [a for a in agents if a not in matched]
    return GoalMap(goals=_finish_with_stays(goals, leftover, state, gmap, cache, used))


def assignment_cost(state, cache, goal_map):
    """Total agent-to-goal distance over task goals in a goal map."""
    total = 0
    for agent, goal in goal_map.goals.items():
        if goal.kind == GoalKind.TASK:
            d = cache.dist(state.positions[agent], goal.cell)
            if d != UNREACHABLE:
                total += d
    return total
