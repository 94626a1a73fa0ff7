"""Acceptance gate: the eight binding checks, one report line each.

Every test prints a [PASS]/[FAIL] line on the live terminal (capture
disabled) so a full run always shows the per-criterion outcome, then
asserts. Budgeted criteria include their wall-clock bound in the
check itself.
"""

import time

import numpy as np
import pytest

from fleetflow.aggregation import build_partition, select_seeds
from fleetflow.baselines import assignment_cost, gopt_schedule
from fleetflow.engine import CSV_HEADER, EpisodeConfig, run_episode
from fleetflow.errors import Infeasible
from fleetflow.fixtures import open_map, warehouse_large, warehouse_small
from fleetflow.grid_map import UNREACHABLE, DistCache
from fleetflow.guidance import current_distribution, schedulable_free_agents
from fleetflow.local_match import AgentRow, PlaceholderCol, solve_assignment
from fleetflow.pipeline import FlowScheduler
from fleetflow.rebalance import (
    instance_from_state,
    round_distribution,
    solve_transport,
)

from conftest import open_grid
from test_kernels import enumerate_transport_min, random_balanced_instance
from test_local_match import brute_force_assignment, random_problem
from test_pipeline import random_state


def report(capsys, ok, label, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    return ok


def test_transport_optimality(capsys):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    exact = 0
    for _ in range(200):
        supply, demand, cost = random_balanced_instance(rng)
        inst = instance_from_state(supply, demand, cost)
        want = enumerate_transport_min(supply, demand, cost)
        if solve_transport(inst).cost == want:
            exact += 1
    elapsed = time.perf_counter() - start
    ok = exact == 200 and elapsed < 10.0
    assert report(capsys, ok, "transport optimality",
                  f"{exact}/200 instances match enumeration, "
                  f"{elapsed:.1f}s (<10s)")


def test_local_assignment_optimality(capsys):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    bad = []
    for trial in range(200):
        prob = random_problem(rng)
        oracle = brute_force_assignment(prob)
        if oracle is None:
            try:
                solve_assignment(prob)
                bad.append(f"trial {trial}: missed infeasibility")
            except Infeasible:
                pass
            continue
        card, cost = oracle
        pairs = solve_assignment(prob)
        got_cost = sum(int(prob.cost[r][c]) for r, c in pairs)
        placeholder_cols = {c for c, col in enumerate(prob.cols)
                            if isinstance(col, PlaceholderCol)}
        covered = {c for r, c in pairs if isinstance(prob.rows[r], AgentRow)}
        if len(pairs) != card or got_cost != cost:
            bad.append(f"trial {trial}: got ({len(pairs)},{got_cost}) "
                       f"want ({card},{cost})")
        if any((r, c) in prob.forbidden for r, c in pairs):
            bad.append(f"trial {trial}: forbidden pair selected")
        if any(prob.cost[r][c] == UNREACHABLE for r, c in pairs):
            bad.append(f"trial {trial}: unreachable pair selected")
        if not placeholder_cols <= covered:
            bad.append(f"trial {trial}: placeholder column left to a "
                       "placeholder row")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10.0
    assert report(capsys, ok, "local assignment optimality",
                  f"200 problems vs brute force, {elapsed:.1f}s (<10s)"
                  + ("" if not bad else f"; first issue: {bad[0]}"))


def test_single_region_equivalence(capsys):
    gmap = open_grid(5, 5)
    cache = DistCache(gmap)
    part = build_partition(gmap, [12])
    rng = np.random.default_rng(303)
    equal = 0
    for _ in range(100):
        n_a = int(rng.integers(1, 7))
        n_t = int(rng.integers(1, 7))
        state = random_state(rng, gmap, n_a, n_t)
        sched = FlowScheduler(part, cache)
        flow_cost = assignment_cost(state, cache, sched.schedule(state))
        opt_cost = assignment_cost(
            state, cache, gopt_schedule(state, cache, frozenset()))
        if flow_cost == opt_cost:
            equal += 1
    ok = equal == 100
    assert report(capsys, ok, "single-region equivalence",
                  f"{equal}/100 states match the optimal matching cost")


def test_identity_rebalancing_is_diagonal(capsys):
    gmap = open_grid(7, 7)
    part = build_partition(gmap, [8, 24, 40])
    rng = np.random.default_rng(404)
    diagonal = 0
    for _ in range(100):
        n_a = int(rng.integers(1, 9))
        state = random_state(rng, gmap, n_a, int(rng.integers(1, 6)))
        counts = np.zeros(part.n_regions, dtype=np.int64)
        for agent in schedulable_free_agents(state, part):
            counts[part.region_of[state.positions[agent]]] += 1
        delta = current_distribution(state, part)
        demands = round_distribution(delta, int(counts.sum()))
        flow = solve_transport(
            instance_from_state(counts, demands, part.region_dist))
        if flow.cost == 0 and np.array_equal(flow.y, np.diag(counts)):
            diagonal += 1
    ok = diagonal == 100
    assert report(capsys, ok, "identity rebalancing",
                  f"{diagonal}/100 states give a diagonal zero-cost flow")


def test_simulation_safety_suite(capsys):
    gmap, stations = open_map(10, 10)
    start = time.perf_counter()
    dirty = []
    for scheduler in ("greedy", "gopt", "flow"):
        for seed in range(20):
            metrics = run_episode(EpisodeConfig(
                gmap=gmap, stations=stations, map_name="open10",
                scheduler=scheduler, seed=seed))
            for kind, count in metrics.violations.items():
                if count:
                    dirty.append(f"{scheduler} seed {seed}: {kind}={count}")
    elapsed = time.perf_counter() - start
    ok = not dirty and elapsed < 60.0
    assert report(capsys, ok, "simulation safety",
                  f"3 schedulers x 20 episodes, zero violations, "
                  f"{elapsed:.0f}s (<60s)"
                  + ("" if not dirty else f"; first: {dirty[0]}"))


def test_scheduler_ordering(capsys):
    gmap, stations = warehouse_small()
    start = time.perf_counter()
    means = {}
    for scheduler in ("greedy", "gopt", "flow"):
        total = 0
        for seed in range(5):
            total += run_episode(EpisodeConfig(
                gmap=gmap, stations=stations, map_name="warehouse_small",
                scheduler=scheduler, n_agents=50, n_tasks=75, horizon=2000,
                seed=seed)).throughput
        means[scheduler] = total / 5
    elapsed = time.perf_counter() - start
    ratio = means["flow"] / means["greedy"]
    ok = (ratio >= 0.95 and means["gopt"] >= means["greedy"]
          and elapsed < 300.0)
    assert report(capsys, ok, "scheduler ordering",
                  f"greedy {means['greedy']:.1f}, gopt {means['gopt']:.1f}, "
                  f"flow {means['flow']:.1f} ({ratio:.3f}x >= 0.95x), "
                  f"{elapsed:.0f}s (<300s)")


def test_lifelong_latency(capsys):
    gmap, stations = warehouse_large()
    seeds = select_seeds(gmap, stations)
    part = build_partition(gmap, seeds)
    metrics = run_episode(EpisodeConfig(
        gmap=gmap, stations=stations, map_name="warehouse_large",
        scheduler="flow", n_agents=200, n_tasks=300, horizon=200, seed=0))
    p50 = metrics.csv_row()[CSV_HEADER.index("latency_p50_ms")]
    ok = part.n_regions <= 120 and p50 < 100.0
    assert report(capsys, ok, "lifelong latency",
                  f"p50 {p50:.1f}ms (<100ms) at 200 agents over "
                  f"{part.n_regions} regions (<=120)")


def test_aggregation_compression(capsys):
    values = {}
    for name, fixture in (("warehouse_small", warehouse_small),
                          ("warehouse_large", warehouse_large)):
        gmap, stations = fixture()
        part = build_partition(gmap, select_seeds(gmap, stations))
        values[name] = part.compression()
    ok = all(v <= 0.10 for v in values.values())
    assert report(capsys, ok, "aggregation compression",
                  ", ".join(f"{k} {v:.4f}" for k, v in values.items())
                  + " (<=0.10)")
