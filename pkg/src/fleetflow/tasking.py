"""Lifelong task pool of constant size with two-errand tasks.

Each task visits a pickup cell and then a delivery cell. Completed
tasks are replaced immediately so the open pool always holds exactly M
tasks. Stages move forward only: Unclaimed -> ToPickup (first
assignment) -> ToDelivery (agent reached pickup) -> Done. A ToPickup
task abandoned by reassignment keeps its stage; it simply has no
assigned agent until matched again.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from fleetflow.errors import MapSaturated


class TaskStage(IntEnum):
    UNCLAIMED = 0
    TO_PICKUP = 1
    TO_DELIVERY = 2
    DONE = 3


UNSET = None


@dataclass
class Task:
    """One pickup-and-delivery task.

    Timestamps: t_assigned restamps whenever the assigned agent
    changes (time-to-task measures from the final assignment),
    t_pickup marks arrival at the first errand, t_done at the second.
    """

    id: int
    pickup: int
    delivery: int
    stage: TaskStage = TaskStage.UNCLAIMED
    t_assigned: object = UNSET
    t_pickup: object = UNSET
    t_done: object = UNSET

    @property
    def current_errand(self):
        """The actionable cell: pickup until reached, then delivery."""
        return self.delivery if self.stage >= TaskStage.TO_DELIVERY else self.pickup


@dataclass
class TaskPool:
    """Open tasks keyed by id, plus the completion log."""

    open: dict
    M: int
    next_id: int
    completed: list = field(default_factory=list)

    def open_ids(self):
        return sorted(self.open)


def _candidates(gmap, occupied):
    cells = gmap.traversable_cells()
    if occupied:
        occ = np.asarray(sorted(occupied), dtype=np.int32)
        cells = cells[~np.isin(cells, occ)]
    return cells


def generate_tasks(gmap, occupied, count, rng, start_id=0):
    """Sample `count` tasks uniformly over unoccupied traversable cells.

    Pickup and delivery are drawn independently, redrawing the
    delivery until it differs from the pickup. Errand cells may
    coincide across tasks. Draws nothing when count = 0.
    """
    if count == 0:
        return []
    cells = _candidates(gmap, occupied)
    n = cells.shape[0]
    if n < 2:
        raise MapSaturated(f"only {n} unoccupied cells; need at least 2")
    tasks = []
    for k in range(count):
        pickup = int(cells[rng.integers(0, n)])
        delivery = int(cells[rng.integers(0, n)])
        while delivery == pickup:
            delivery = int(cells[rng.integers(0, n)])
        tasks.append(Task(id=start_id + k, pickup=pickup, delivery=delivery))
    return tasks


def new_pool(gmap, occupied, m, rng):
    """Create a pool of m fresh tasks."""
    tasks = generate_tasks(gmap, occupied, m, rng, start_id=0)
    return TaskPool(open={t.id: t for t in tasks}, M=m, next_id=m)


def advance_tasks(pool, arrivals, t, gmap, occupied, rng, *, task_of):
    """Advance stages for agents standing on their current errand.

    arrivals are (agent, cell) pairs; task_of maps an agent to its
    assigned Task (or None). Arrivals not on the assigned task's
    current errand are ignored. Completed tasks are replaced from the
    unoccupied cells so |open| stays at pool.M. Returns the completed
    tasks in arrival order.
    """
    completed = []
    for agent, cell in arrivals:
        task = task_of(agent)
        if task is None:
            continue
        if task.stage == TaskStage.TO_PICKUP and cell == task.pickup:
            task.stage = TaskStage.TO_DELIVERY
            task.t_pickup = t
        elif task.stage == TaskStage.TO_DELIVERY and cell == task.delivery:
            task.stage = TaskStage.DONE
            task.t_done = t
            del pool.open[task.id]
            pool.completed.append(task)
            completed.append(task)
    if completed:
        fresh = generate_tasks(
            gmap, occupied, len(completed), rng, start_id=pool.next_id
        )
        pool.next_id += len(fresh)
        for task in fresh:
            pool.open[task.id] = task
    return completed


def free_tasks(pool, allow_reassign=True):
    """Tasks eligible for (re)assignment, ascending id.

    Unclaimed tasks are always eligible; ToPickup tasks only while
    reassignment is allowed (their agent has not started the first
    errand). ToDelivery tasks are locked to their agent.
    """
    out = []
    for tid in sorted(pool.open):
        task = pool.open[tid]
        if task.stage == TaskStage.UNCLAIMED:
            out.append(task)
        elif allow_reassign and task.stage == TaskStage.TO_PICKUP:
            out.append(task)
    return out
