"""Lifelong episode loop: schedule, plan, move, advance, measure.

Each step builds goals for locked agents (those committed to a task
leg), lets the scheduler assign the free agents, merges both into one
injective goal map, plans a collision-free move with the PIBT planner,
then advances task stages and replaces completed tasks. Scheduler
wall-clock latency is recorded per step and split into the initial
call (no assignments exist yet) and lifelong calls; step time beyond
the shared budget is logged as an overrun, never interrupted.

In training mode the engine additionally emits, piggybacked on each
guidance request, a reward block for the step one window earlier:
{"reward_t": t0, "completions": |D_t0|, "active": [[agent, steps until
the task assigned at t0 completed, or -1 if censored], ...]}.
"""

import json
import logging
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from fleetflow import kernels
from fleetflow.aggregation import build_partition, select_seeds
from fleetflow.baselines import assignment_cost, gopt_schedule, greedy_schedule
from fleetflow.errors import ConfigError, ProtocolError, Timeout
from fleetflow.grid_map import DistCache, load_map
from fleetflow.guidance import (
    ExternalGuidanceClient,
    extract_features,
    free_agents,
    validate_reply,
)
from fleetflow.local_match import Goal, GoalKind, GoalMap, nearest_unused_cell
from fleetflow.pipeline import FlowScheduler
from fleetflow.planner import base_priority, plan_step
from fleetflow.tasking import TaskStage, advance_tasks, new_pool

log = logging.getLogger("fleetflow.engine")

SCHEDULERS = ("greedy", "gopt", "flow")
GUIDANCE_MODES = ("proportional", "uniform", "external")


@dataclass
class WorldState:
    """Mutable simulation state shared with schedulers (read-only there)."""

    t: int
    positions: dict
    pool: object
    assignments: dict
    prev_goal_map: object
    rng: object
    allow_reassign: bool = True


@dataclass
class EpisodeConfig:
    """Everything needed to reproduce one episode.

    Exactly one of gmap or map_path must be set. external_streams may
    be "stdio" (serve guidance over this process's stdin/stdout, used
    when a trainer runs the engine as a child) or a (reader, writer)
    pair in tests.
    """

    gmap: object = None
    stations: tuple = ()
    map_path: str = None
    map_name: str = None
    n_agents: int = 8
    n_tasks: int = 12
    horizon: int = 500
    scheduler: str = "greedy"
    guidance: str = "proportional"
    external_cmd: str = None
    external_addr: str = None
    external_streams: object = None
    epsilon: object = None
    seed: int = 0
    allow_reassign: bool = True
    budget_s: float = 1.0
    period: int = 1000
    deadline: float = 0.2
    record_steps: bool = False
    validate: bool = True
    train_mode: bool = False
    train_window: int = 50


@dataclass
class Metrics:
    """Episode results and accounting.

    core_dict() excludes wall-clock data so determinism can be checked
    bit-for-bit; to_dict() is the full serialized document.
    """

    config: dict
    throughput: int = 0
    ttt_sum: int = 0
    ttt_n: int = 0
    tit_sum: int = 0
    tit_n: int = 0
    conflicts_total: int = 0
    fallbacks: int = 0
    violations: dict = field(default_factory=lambda: {
        "collisions": 0, "injectivity": 0, "pool_size": 0, "missing_goal": 0,
    })
    heatmap: np.ndarray = None
    latency_initial: list = field(default_factory=list)
    latency_lifelong: list = field(default_factory=list)
    overruns: int = 0
    per_step: list = None

    def _mean(self, total, count):
        return total / count if count else None

    def core_dict(self):
        per_step = None
        if self.per_step is not None:
            per_step = [
                {k: v for k, v in rec.items() if k != "latency_ms"}
                for rec in self.per_step
            ]
        return {
            "schema_version": 1,
            "config": self.config,
            "metrics": {
                "throughput": self.throughput,
                "time_to_task_mean_steps": self._mean(self.ttt_sum, self.ttt_n),
                "time_in_task_mean_steps": self._mean(self.tit_sum, self.tit_n),
                "time_to_task_mean_s": self._mean(self.ttt_sum, self.ttt_n),
                "time_in_task_mean_s": self._mean(self.tit_sum, self.tit_n),
                "conflicts_total": self.conflicts_total,
                "guidance_fallbacks": self.fallbacks,
                "violations": dict(self.violations),
            },
            "heatmap": {
                "width": self.config["width"],
                "height": self.config["height"],
                "counts": self.heatmap.tolist(),
            },
            "per_step": per_step,
        }

    def _latency_stats(self, samples):
        if not samples:
            return {"n": 0, "mean_ms": None, "p50_ms": None,
                    "p90_ms": None, "p99_ms": None, "max_ms": None}
        arr = np.asarray(samples) * 1000.0
        return {
            "n": int(arr.size),
            "mean_ms": float(arr.mean()),
            "p50_ms": float(np.percentile(arr, 50)),
            "p90_ms": float(np.percentile(arr, 90)),
            "p99_ms": float(np.percentile(arr, 99)),
            "max_ms": float(arr.max()),
        }

    def to_dict(self):
        doc = self.core_dict()
        doc["latency"] = {
            "initial": self._latency_stats(self.latency_initial),
            "lifelong": self._latency_stats(self.latency_lifelong),
            "budget_s": self.config["budget_s"],
            "budget_overruns": self.overruns,
        }
        doc["per_step"] = self.per_step
        return doc

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def csv_row(self):
        """Flat summary row; see csv_header for the column order."""
        lifelong = self._latency_stats(self.latency_lifelong)
        cfg = self.config
        ttt = self._mean(self.ttt_sum, self.ttt_n)
        tit = self._mean(self.tit_sum, self.tit_n)
        return [
            cfg["map"], cfg["agents"], cfg["tasks"], cfg["horizon"],
            cfg["scheduler"], cfg["guidance"] or "", cfg["seed"],
            self.throughput,
            round(ttt, 3) if ttt is not None else "",
            round(tit, 3) if tit is not None else "",
            self.conflicts_total,
            round(lifelong["p50_ms"], 3) if lifelong["p50_ms"] is not None else "",
            self.overruns,
        ]


CSV_HEADER = [
    "map", "agents", "tasks", "horizon", "scheduler", "guidance", "seed",
    "throughput", "time_to_task_steps", "time_in_task_steps",
    "conflicts", "latency_p50_ms", "budget_overruns",
]


class _BaselineScheduler:
    """Adapter giving greedy/gopt the pipeline scheduler interface."""

    def __init__(self, name, fn, cache):
        self.name = name
        self._fn = fn
        self._cache = cache
        self.fallbacks = 0
        self.last_flow_cost = 0

    def schedule(self, state, reserved=frozenset(), delta_override=None):
        return self._fn(state, self._cache, reserved)


def _resolve_map(config):
    if (config.gmap is None) == (config.map_path is None):
        raise ConfigError("exactly one of gmap or map_path must be set")
    if config.gmap is not None:
        return config.gmap, list(config.stations), config.map_name or "<memory>"
    gmap, stations = load_map(config.map_path)
    if config.stations:
        stations = sorted(set(stations) | set(config.stations))
    return gmap, stations, config.map_path


def _make_client(config):
    if config.external_streams == "stdio":
        return ExternalGuidanceClient(
            streams=(sys.stdin.buffer, sys.stdout.buffer),
            deadline=config.deadline,
        )
    if config.external_streams is not None:
        return ExternalGuidanceClient(
            streams=config.external_streams, deadline=config.deadline
        )
    if config.external_cmd:
        return ExternalGuidanceClient(
            cmd=config.external_cmd, deadline=config.deadline
        )
    if config.external_addr:
        return ExternalGuidanceClient(
            addr=config.external_addr, deadline=config.deadline
        )
    raise ConfigError(
        "guidance 'external' needs --external-cmd or --external-addr"
    )


def _validate_config(config, gmap):
    if config.scheduler not in SCHEDULERS:
        raise ConfigError(f"unknown scheduler {config.scheduler!r}")
    if config.guidance not in GUIDANCE_MODES:
        raise ConfigError(f"unknown guidance {config.guidance!r}")
    if config.n_agents < 0:
        raise ConfigError("agent count must be nonnegative")
    if config.n_agents > gmap.n_traversable:
        raise ConfigError(
            f"{config.n_agents} agents exceed {gmap.n_traversable} traversable cells"
        )
    if config.n_tasks < 1:
        raise ConfigError("task pool size must be at least 1")
    if config.horizon < 0:
        raise ConfigError("horizon must be nonnegative")
    if config.guidance == "external" and config.scheduler != "flow":
        raise ConfigError("external guidance requires the flow scheduler")
    if config.train_mode:
        if config.scheduler != "flow":
            raise ConfigError("training mode requires the flow scheduler")
        if config.train_window < 1:
            raise ConfigError("training window must be at least 1 step")


def run_episode(config):
    """Run one episode; returns Metrics. Deterministic given config."""
    gmap, stations, map_label = _resolve_map(config)
    _validate_config(config, gmap)
    rng = np.random.default_rng(config.seed)
    cache = DistCache(gmap)

    partition = None
    if config.scheduler == "flow":
        seeds = select_seeds(gmap, stations)
        partition = build_partition(gmap, seeds, config.epsilon)

    client = None
    needs_external = config.guidance == "external" or config.train_mode
    if needs_external and config.scheduler == "flow":
        client = _make_client(config)

    cfg_echo = {
        "map": map_label,
        "width": gmap.width,
        "height": gmap.height,
        "n_cells": gmap.width * gmap.height,
        "n_traversable": gmap.n_traversable,
        "agents": config.n_agents,
        "tasks": config.n_tasks,
        "horizon": config.horizon,
        "scheduler": config.scheduler,
        "guidance": config.guidance if config.scheduler == "flow" else None,
        "epsilon": partition.epsilon if partition else None,
        "n_regions": partition.n_regions if partition else None,
        "seed": config.seed,
        "allow_reassign": config.allow_reassign,
        "period": config.period,
        "budget_s": config.budget_s,
        "compiled_kernels": kernels.HAVE_COMPILED,
        "train_mode": config.train_mode,
        "train_window": config.train_window if config.train_mode else None,
    }
    metrics = Metrics(config=cfg_echo)
    metrics.heatmap = np.zeros(gmap.width * gmap.height, dtype=np.int64)
    if config.record_steps:
        metrics.per_step = []

    try:
        _run_loop(config, gmap, cache, partition, client, rng, metrics)
    finally:
        if client is not None and config.external_streams is None:
            client.close()
    return metrics


def _build_scheduler(config, cache, partition, client):
    if config.scheduler == "greedy":
        return _BaselineScheduler("greedy", greedy_schedule, cache)
    if config.scheduler == "gopt":
        return _BaselineScheduler("gopt", gopt_schedule, cache)
    mode = config.guidance
    if config.train_mode:
        # the engine issues the external request itself each step
        mode = "proportional"
    return FlowScheduler(
        partition, cache, guidance_mode=mode, client=client,
        period=config.period,
    )


def _locked_goals(state, free_set, cache, gmap):
    """Goals for agents committed to a task leg, bumped off collisions."""
    locked = {}
    used = set()
    for agent in sorted(state.assignments):
        if agent in free_set:
            continue
        task = state.pool.open[state.assignments[agent]]
        cell = nearest_unused_cell(gmap, cache, task.current_errand, used)
        used.add(cell)
        locked[agent] = Goal(cell=cell, kind=GoalKind.TASK, task_id=task.id)
    return locked


def _check_plan(gmap, positions, plan):
    """Count vertex/swap/edge violations in a planned step."""
    nxt = plan.next_pos
    cells = list(nxt.values())
    bad = 0
    if len(set(cells)) != len(cells):
        bad += 1
    for agent, target in nxt.items():
        if not gmap.has_arc(positions[agent], target):
            bad += 1
    for agent, target in nxt.items():
        other = None
        for b, cell in positions.items():
            if cell == target and b != agent:
                other = b
                break
        if other is not None and nxt[other] == positions[agent] and target != positions[agent]:
            bad += 1
    return bad


def _run_loop(config, gmap, cache, partition, client, rng, metrics):
    n = config.n_agents
    trav = gmap.traversable_cells()
    start_cells = rng.choice(trav, size=n, replace=False) if n else []
    positions = {a: int(start_cells[a]) for a in range(n)}
    pool = new_pool(gmap, set(positions.values()), config.n_tasks, rng)
    state = WorldState(
        t=0,
        positions=positions,
        pool=pool,
        assignments={},
        prev_goal_map=GoalMap(goals={
            a: Goal(cell=positions[a], kind=GoalKind.STAY) for a in positions
        }),
        rng=rng,
        allow_reassign=config.allow_reassign,
    )
    scheduler = _build_scheduler(config, cache, partition, client)
    priorities = {a: base_priority(a, n) for a in positions}

    # training bookkeeping
    active_at = {}
    completions_at = {}
    task_done_at = {}

    for t in range(config.horizon):
        state.t = t
        step_start = time.perf_counter()
        free_set = set(free_agents(state))
        locked = _locked_goals(state, free_set, cache, gmap)
        reserved = frozenset(g.cell for g in locked.values())
        was_initial = not state.assignments

        delta_override = None
        if config.train_mode and client is not None and partition is not None:
            delta_override = _train_request(
                config, state, partition, cache, client, metrics,
                active_at, completions_at, task_done_at, t,
            )

        sched_start = time.perf_counter()
        goal_map = scheduler.schedule(
            state, reserved, delta_override=delta_override
        )
        sched_dt = time.perf_counter() - sched_start
        (metrics.latency_initial if was_initial
         else metrics.latency_lifelong).append(sched_dt)

        _apply_assignments(state, goal_map, t)
        assigned_dist = assignment_cost(state, cache, goal_map)
        if config.train_mode:
            active_at[t] = sorted(state.assignments.items())

        merged = GoalMap(goals={**locked, **goal_map.goals})
        if config.validate:
            if not merged.is_injective():
                metrics.violations["injectivity"] += 1
            missing = [a for a in positions if a not in merged.goals]
            if missing:
                metrics.violations["missing_goal"] += 1

        plan = plan_step(gmap, positions, merged, priorities, cache, t)
        if config.validate and _check_plan(gmap, positions, plan):
            metrics.violations["collisions"] += 1

        for _, cell, _ in plan.conflicts:
            metrics.heatmap[cell] += 1
        metrics.conflicts_total += len(plan.conflicts)

        positions.update(plan.next_pos)
        priorities = plan.priorities

        arrival_tasks = []
        for agent in sorted(state.assignments):
            task = pool.open[state.assignments[agent]]
            if positions[agent] == task.current_errand:
                arrival_tasks.append((agent, task))
        completed = advance_tasks(
            pool,
            [(agent, positions[agent]) for agent, _ in arrival_tasks],
            t, gmap, set(positions.values()), rng,
            task_of=lambda a: pool.open.get(state.assignments.get(a)),
        )
        done_ids = {task.id for task in completed}
        for agent in [a for a, tid in state.assignments.items() if tid in done_ids]:
            del state.assignments[agent]
        for task in completed:
            task_done_at[task.id] = t
            metrics.tit_sum += task.t_done - task.t_pickup
            metrics.tit_n += 1
        for _, task in arrival_tasks:
            if task.stage == TaskStage.TO_DELIVERY and task.t_pickup == t:
                metrics.ttt_sum += task.t_pickup - task.t_assigned
                metrics.ttt_n += 1
        metrics.throughput += len(completed)
        completions_at[t] = len(completed)

        if config.validate and len(pool.open) != pool.M:
            metrics.violations["pool_size"] += 1

        step_dt = time.perf_counter() - step_start
        if step_dt > config.budget_s:
            metrics.overruns += 1
            log.warning("step %d took %.3fs (budget %.3fs)", t, step_dt, config.budget_s)

        if metrics.per_step is not None:
            metrics.per_step.append({
                "t": t,
                "n_free": len(free_set),
                "completions": len(completed),
                "conflicts": len(plan.conflicts),
                "assigned_dist": assigned_dist,
                "flow_cost": scheduler.last_flow_cost,
                "latency_ms": sched_dt * 1000.0,
            })

        state.prev_goal_map = merged

    metrics.fallbacks += scheduler.fallbacks


def _apply_assignments(state, goal_map, t):
    """Commit a scheduler's task goals into assignments and stages."""
    pre = dict(state.assignments)
    prev_holder = {tid: a for a, tid in pre.items()}
    for agent in goal_map.goals:
        state.assignments.pop(agent, None)
    for agent in sorted(goal_map.goals):
        goal = goal_map.goals[agent]
        if goal.kind != GoalKind.TASK:
            continue
        tid = goal.task_id
        task = state.pool.open[tid]
        state.assignments[agent] = tid
        if task.stage == TaskStage.UNCLAIMED:
            task.stage = TaskStage.TO_PICKUP
            task.t_assigned = t
        elif prev_holder.get(tid) != agent:
            task.t_assigned = t


def _train_request(config, state, partition, cache, client, metrics,
                   active_at, completions_at, task_done_at, t):
    """Issue the training-mode guidance request for step t.

    Returns the validated Distribution or None (fault -> proportional
    fallback downstream). The request carries the reward block for
    step t - train_window when that window has closed.
    """
    features = extract_features(
        state, partition, state.prev_goal_map,
        period=config.period, cache=cache,
    )
    extra = {}
    t0 = t - config.train_window
    if t0 >= 0:
        active = []
        for agent, tid in active_at.pop(t0, []):
            done = task_done_at.get(tid)
            if done is not None and t0 <= done <= t0 + config.train_window:
                active.append([agent, done - t0])
            else:
                active.append([agent, -1])
        extra = {
            "reward_t": t0,
            "completions": completions_at.pop(t0, 0),
            "active": active,
        }
    try:
        probs = client.request(features, extra=extra)
        return validate_reply(probs, partition.n_regions)
    except (ProtocolError, Timeout) as exc:
        metrics.fallbacks += 1
        log.warning("training guidance failed (%s); proportional fallback", exc)
        return None
