"""Shared test fixtures: tiny maps, state builders, and BFS oracles.

The oracles here are written independently of the package kernels
(dict-based, no CSR, no numpy queues) so kernel tests compare two
genuinely different implementations.
"""

import numpy as np
import pytest

from fleetflow.engine import WorldState
from fleetflow.grid_map import GridMap
from fleetflow.local_match import Goal, GoalKind, GoalMap
from fleetflow.tasking import Task, TaskPool, TaskStage


def grid_from_rows(rows, one_way=()):
    """GridMap from ascii rows ('.' traversable, '@'/'T' blocked)."""
    height = len(rows)
    width = len(rows[0])
    assert all(len(r) == width for r in rows)
    trav = np.zeros(width * height, dtype=bool)
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            trav[y * width + x] = ch == "."
    return GridMap.from_grid(trav, width, height, one_way=one_way)


def open_grid(width, height):
    return grid_from_rows(["." * width] * height)


def dict_bfs(gmap, source, reverse=False):
    """Independent BFS oracle over GridMap adjacency (dict + list queue)."""
    nxt = gmap.in_neighbors if reverse else gmap.neighbors
    dist = {source: 0}
    queue = [source]
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for v in nxt(u):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def make_state(positions, tasks=(), assignments=None, allow_reassign=True,
               t=0, prev_goal_map=None, pool_m=None):
    """WorldState for scheduler unit tests (no rng, no engine loop)."""
    open_tasks = {task.id: task for task in tasks}
    if prev_goal_map is None:
        prev_goal_map = GoalMap(goals={
            a: Goal(cell=c, kind=GoalKind.STAY) for a, c in positions.items()
        })
    return WorldState(
        t=t,
        positions=dict(positions),
        pool=TaskPool(open=open_tasks, M=pool_m or max(len(open_tasks), 1),
                      next_id=max(open_tasks, default=-1) + 1),
        assignments=dict(assignments or {}),
        prev_goal_map=prev_goal_map,
        rng=None,
        allow_reassign=allow_reassign,
    )


def task(tid, pickup, delivery, stage=TaskStage.UNCLAIMED, **stamps):
    return Task(id=tid, pickup=pickup, delivery=delivery, stage=stage,
                **stamps)


def random_blocked_map(rng, width, height, p_block=0.3):
    """Random map with a guaranteed-traversable top-left cell."""
    while True:
        trav = rng.random(width * height) >= p_block
        if trav.sum() >= 2:
            gmap = GridMap.from_grid(trav, width, height)
            return gmap


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
