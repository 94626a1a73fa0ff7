"""Per-region assignment with cross-region placeholders, and recovery
of the global goal map.

Each region solves a bipartite matching between its free agents plus
inbound placeholder agents (one per unit of incoming flow, sitting at
the source region's seed) and its free tasks plus outbound placeholder
tasks (one per unit of outgoing flow, at the destination seed). Every
outbound placeholder must be fulfilled by a real agent, and
placeholder-placeholder pairs are forbidden. Recovery stitches the
regional matchings into one injective goal map: real-real matches
become task goals, cross-region placeholder pairs hand agents the
tasks reserved for them in the destination region, and leftover agents
receive distinct waypoint cells near the destination seed.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from fleetflow.errors import FlowMismatch, Infeasible, WaypointExhausted
from fleetflow.grid_map import UNREACHABLE
from fleetflow.guidance import schedulable_free_agents
from fleetflow.tasking import free_tasks


class GoalKind(Enum):
    TASK = "task"
    WAYPOINT = "waypoint"
    STAY = "stay"


@dataclass(frozen=True)
class Goal:
    """One agent's goal cell with its provenance."""

    cell: int
    kind: GoalKind
    task_id: int = None
    region: int = None


@dataclass
class GoalMap:
    """Agent -> Goal mapping; goal cells must be pairwise distinct."""

    goals: dict

    def is_injective(self):
        cells = [g.cell for g in self.goals.values()]
        return len(cells) == len(set(cells))

    def cells(self):
        return {g.cell for g in self.goals.values()}


@dataclass(frozen=True)
class AgentRow:
    agent: int
    cell: int


@dataclass(frozen=True)
class PlaceholderRow:
    """Inbound flow unit from `region`, standing at that region's seed."""

    region: int
    unit: int
    cell: int


@dataclass(frozen=True)
class TaskCol:
    task_id: int
    cell: int


@dataclass(frozen=True)
class PlaceholderCol:
    """Outbound flow unit toward `region`, located at that region's seed."""

    region: int
    unit: int
    cell: int


@dataclass
class LocalProblem:
    """One region's matching instance.

    cost[r][c] is the directed shortest-path distance from the row
    entity's cell to the column entity's cell (UNREACHABLE sentinel).
    forbidden holds exactly the placeholder-row x placeholder-col index
    pairs. kappa = min(#rows, #cols) is the target cardinality.
    """

    region: int
    rows: list
    cols: list
    cost: np.ndarray
    forbidden: set
    kappa: int


def candidate_tasks(state, reserved=frozenset()):
    """Free tasks eligible for matching this step, ascending id.

    Tasks whose current errand cell is reserved by a locked agent's
    goal, or duplicates a lower-id candidate's errand cell, are shadowed
    for this step (assigning them would break goal-map injectivity).
    """
    out = []
    used = set(reserved)
    for task in free_tasks(state.pool, state.allow_reassign):
        cell = task.current_errand
        if cell in used:
            continue
        used.add(cell)
        out.append(task)
    return out


def build_region_problem(i, flow, state, partition, cache,
                         reserved=frozenset()):
    """Assemble region i's LocalProblem against the solved flow.

    Rows: region i's schedulable free agents by id, then inbound
    placeholders by (source region, unit). Cols: candidate tasks with
    errand in i by id, then outbound placeholders by (destination
    region, unit). Raises FlowMismatch when the flow's row sum differs
    from the free-agent count.
    """
    y = flow.y
    region_of = partition.region_of
    agents = [
        a for a in schedulable_free_agents(state, partition)
        if region_of[state.positions[a]] == i
    ]
    row_sum = int(y[i].sum())
    if row_sum != len(agents):
        raise FlowMismatch(
            f"region {i}: flow row sum {row_sum} != {len(agents)} free agents"
        )
    rows = [AgentRow(agent=a, cell=state.positions[a]) for a in agents]
    for j in range(partition.n_regions):
        if j == i:
            continue
        for unit in range(int(y[j, i])):
            rows.append(
                PlaceholderRow(region=j, unit=unit, cell=partition.seeds[j])
            )
    cols = [
        TaskCol(task_id=t.id, cell=t.current_errand)
        for t in candidate_tasks(state, reserved)
        if region_of[t.current_errand] == i
    ]
    n_real_tasks = len(cols)
    for j in range(partition.n_regions):
        if j == i:
            continue
        for unit in range(int(y[i, j])):
            cols.append(
                PlaceholderCol(region=j, unit=unit, cell=partition.seeds[j])
            )
    cost = np.empty((len(rows), len(cols)), dtype=np.int64)
    for r, row in enumerate(rows):
        for c, col in enumerate(cols):
            cost[r, c] = cache.dist(row.cell, col.cell)
    forbidden = {
        (r, c)
        for r in range(len(agents), len(rows))
        for c in range(n_real_tasks, len(cols))
    }
    return LocalProblem(
        region=i,
        rows=rows,
        cols=cols,
        cost=cost,
        forbidden=forbidden,
        kappa=min(len(rows), len(cols)),
    )


def solve_assignment(prob):
    """Solve one LocalProblem; returns sorted (row, col) index pairs.

    Pads to a (rows+cols)-square matrix with three cost tiers: real
    pair costs; a skip tier (row or column left unmatched) larger than
    any real total, so cardinality is maximized before cost; and a
    prohibitive tier for forbidden pairs, unreachable pairs, and
    skipped placeholder columns (an unmatched placeholder would leave
    outgoing flow unfulfilled). Raises Infeasible when even the
    optimum uses a prohibitive edge, i.e. no matching satisfies the
    placeholder rule.
    """
    n_rows = len(prob.rows)
    n_cols = len(prob.cols)
    if n_cols == 0 or n_rows == 0:
        if any(isinstance(c, PlaceholderCol) for c in prob.cols):
            raise Infeasible(
                f"region {prob.region}: placeholder columns but no rows"
            )
        return []
    n = n_rows + n_cols
    finite = prob.cost[prob.cost != UNREACHABLE]
    finite_sum = int(finite.sum()) if finite.size else 0
    skip = finite_sum + 1
    big = skip * (n + 1) + 1
    padded = np.zeros((n, n), dtype=np.int64)
    padded[:n_rows, :n_cols] = np.where(
        prob.cost == UNREACHABLE, big, prob.cost
    )
    for r, c in prob.forbidden:
        padded[r, c] = big
    padded[:n_rows, n_cols:] = skip
    for c in range(n_cols):
        padded[n_rows:, c] = (
            big if isinstance(prob.cols[c], PlaceholderCol) else skip
        )
    rows_idx, cols_idx = linear_sum_assignment(padded)
    chosen = []
    for r, c in zip(rows_idx, cols_idx):
        if padded[r, c] >= big:
            raise Infeasible(
                f"region {prob.region}: no matching fulfils all placeholders"
            )
        if r < n_rows and c < n_cols:
            chosen.append((int(r), int(c)))
    chosen.sort()
    return chosen


def _sorted_waypoint_assign(partition, j, agents_order, used, goals):
    """Hand each agent a distinct cell of region j in seed-BFS order."""
    order = partition.waypoint_order(j)
    cursor = 0
    for agent in agents_order:
        while cursor < len(order) and int(order[cursor]) in used:
            cursor += 1
        if cursor >= len(order):
            raise WaypointExhausted(
                f"region {j}: no unused cell for waypoint agent {agent}"
            )
        cell = int(order[cursor])
        cursor += 1
        used.add(cell)
        goals[agent] = Goal(cell=cell, kind=GoalKind.WAYPOINT, region=j)


def recover_goal_map(matchings, flow, state, partition, cache,
                     reserved=frozenset()):
    """Merge regional matchings into one injective GoalMap.

    matchings maps region -> (LocalProblem, chosen pairs). Real-real
    pairs become Task goals. For each ordered region pair (i, j), the
    agents matched to (i -> j) outbound placeholders (sorted by
    distance to seed_j, ties by agent id) are paired positionally with
    the tasks matched to inbound placeholders from i in region j
    (sorted by distance from seed_i, ties by task id); surplus agents
    get waypoints in j, at distinct cells of j in seed-BFS order
    (WaypointExhausted when j runs out). Agents unmatched inside their
    own region take the nearest unused cell to their seed, which may
    lie outside the region. Reserved and already-assigned cells are
    never handed out.
    """
    goals = {}
    used = set(reserved)
    out_pairs = {}
    in_pairs = {}
    cross_waypoints = []
    own_waypoints = []

    for i in sorted(matchings):
        prob, pairs = matchings[i]
        matched_rows = set()
        for r, c in pairs:
            row = prob.rows[r]
            col = prob.cols[c]
            matched_rows.add(r)
            if isinstance(row, AgentRow) and isinstance(col, TaskCol):
                goals[row.agent] = Goal(
                    cell=col.cell, kind=GoalKind.TASK, task_id=col.task_id
                )
                used.add(col.cell)
            elif isinstance(row, AgentRow) and isinstance(col, PlaceholderCol):
                out_pairs.setdefault((i, col.region), []).append(row)
            elif isinstance(row, PlaceholderRow) and isinstance(col, TaskCol):
                in_pairs.setdefault((row.region, i), []).append(col)
            # placeholder-placeholder pairs cannot appear (forbidden)
        for r, row in enumerate(prob.rows):
            if r not in matched_rows and isinstance(row, AgentRow):
                own_waypoints.append((i, row.agent))

    for key in sorted(out_pairs):
        i, j = key
        agents = out_pairs[key]
        tasks = in_pairs.get(key, [])
        seed_j = partition.seeds[j]
        agents.sort(
            key=lambda row: (_order_dist(cache, row.cell, seed_j), row.agent)
        )
        seed_i = partition.seeds[i]
        tasks.sort(
            key=lambda col: (_order_dist(cache, seed_i, col.cell), col.task_id)
        )
        for pos, row in enumerate(agents):
            if pos < len(tasks):
                col = tasks[pos]
                goals[row.agent] = Goal(
                    cell=col.cell, kind=GoalKind.TASK, task_id=col.task_id
                )
                used.add(col.cell)
            else:
                cross_waypoints.append((j, row.agent))

    by_region = {}
    for j, agent in cross_waypoints:
        by_region.setdefault(j, []).append(agent)
    for j in sorted(by_region):
        _sorted_waypoint_assign(partition, j, by_region[j], used, goals)

    # agents left unmatched inside their own region take the nearest
    # unused cell to the region seed, spilling past the region boundary
    # when the region itself is full
    for i, agent in own_waypoints:
        cell = nearest_unused_cell(
            partition.gmap, cache, partition.seeds[i], used
        )
        used.add(cell)
        goals[agent] = Goal(cell=cell, kind=GoalKind.WAYPOINT, region=i)

    gmap = GoalMap(goals=goals)
    assert gmap.is_injective(), "recovered goal map lost injectivity"
    return gmap


def _order_dist(cache, src, dst):
    d = cache.dist(src, dst)
    return d if d != UNREACHABLE else np.iinfo(np.int64).max


def nearest_unused_cell(gmap, cache, origin, used):
    """Closest traversable cell to origin not in `used` (origin itself
    when free). Distance is directed origin -> cell, ties to the lowest
    cell id. Raises WaypointExhausted when every reachable cell is
    taken.
    """
    if origin not in used:
        return origin
    dist = cache.from_cell(origin)
    best = None
    best_d = None
    for cell in gmap.traversable_cells():
        cell = int(cell)
        d = dist[cell]
        if d == UNREACHABLE or cell in used:
            continue
        if best_d is None or d < best_d or (d == best_d and cell < best):
            best = cell
            best_d = d
    if best is None:
        raise WaypointExhausted(f"no unused cell reachable from {origin}")
    return best
