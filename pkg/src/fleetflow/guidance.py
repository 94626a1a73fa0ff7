"""Free-agent guidance: heuristic distributions, features, wire client.

Guidance produces the desired distribution of free agents over regions
each step. Built-in policies are proportional (follow the free tasks)
and uniform; an external policy process can be attached over a
newline-delimited JSON protocol and is consulted with a per-request
deadline, falling back to proportional on any protocol fault.

Wire protocol (one JSON object per line):
  request: {"t": int, "n_free": int, "nodes": [[13 floats] * k],
            "edges": [[src, dst, 4 floats] * |E_nh|]}
  reply:   {"probs": [k floats]}
Training mode appends {"completions": int, "active": [[agent, steps]]}
fields to requests; replies are unchanged.
"""

import json
import logging
import math
import os
import select
import shlex
import socket
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from fleetflow.aggregation import ORPHAN_REGION
from fleetflow.errors import NoFreeAgents, ProtocolError, Timeout
from fleetflow.grid_map import UNREACHABLE
from fleetflow.tasking import TaskStage, free_tasks

log = logging.getLogger("fleetflow.guidance")

SUM_TOLERANCE = 1e-6
RENORM_TOLERANCE = 1e-3
DEFAULT_DEADLINE = 0.2
DEFAULT_PERIOD = 1000

NODE_FEATURES = 13
EDGE_FEATURES = 4


@dataclass(frozen=True)
class Distribution:
    """Point on the probability simplex over regions."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise ValueError("probs must be a vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probs must be finite and nonnegative")
        if abs(float(probs.sum()) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probs sum {probs.sum()} outside tolerance")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @staticmethod
    def from_counts(counts):
        """Normalize counts; all-zero counts give the uniform distribution."""
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            return Distribution(np.full(counts.shape[0], 1.0 / counts.shape[0]))
        return Distribution(counts / total)


@dataclass(frozen=True)
class FeatureGraph:
    """Per-region and per-neighborhood-edge features for one step."""

    node_feats: np.ndarray
    edge_feats: np.ndarray
    edge_index: list
    t: int
    n_free: int


def free_agents(state):
    """Agents eligible for (re)assignment, ascending id.

    Unassigned agents are always free. Assigned agents are free while
    their task is still heading to pickup and the pickup is not yet
    reached, unless reassignment is disabled for the run.
    """
    out = []
    for agent in sorted(state.positions):
        tid = state.assignments.get(agent)
        if tid is None:
            out.append(agent)
            continue
        if not state.allow_reassign:
            continue
        task = state.pool.open[tid]
        if task.stage == TaskStage.TO_PICKUP and state.positions[agent] != task.pickup:
            out.append(agent)
    return out


def schedulable_free_agents(state, partition):
    """Free agents standing in a real region (orphan cells excluded)."""
    return [
        a for a in free_agents(state)
        if partition.region_of[state.positions[a]] != ORPHAN_REGION
    ]


def current_distribution(state, partition):
    """Observed free-agent distribution over regions (delta^f)."""
    free = schedulable_free_agents(state, partition)
    if not free:
        raise NoFreeAgents("no schedulable free agents this step")
    counts = np.zeros(partition.n_regions, dtype=np.float64)
    for a in free:
        counts[partition.region_of[state.positions[a]]] += 1
    return Distribution(counts / len(free))


def _free_task_counts(state, partition):
    counts = np.zeros(partition.n_regions, dtype=np.float64)
    for task in free_tasks(state.pool, state.allow_reassign):
        region = partition.region_of[task.current_errand]
        if region != ORPHAN_REGION:
            counts[region] += 1
    return counts


def proportional_guidance(state, partition):
    """Desired distribution proportional to free tasks per region.

    Falls back to uniform when no region holds a free task.
    """
    return Distribution.from_counts(_free_task_counts(state, partition))


def uniform_guidance(partition):
    k = partition.n_regions
    return Distribution(np.full(k, 1.0 / k))


def extract_features(state, partition, prev_goal_map, period=DEFAULT_PERIOD,
                     cache=None):
    """Build the FeatureGraph for one step.

    Node layout: [agents/|V_i|, free agents/N_t, tasks/|V_i|,
    free tasks/N_t, congestion, inflow, outflow, sin x, cos x, sin y,
    cos y, sin(2pi t/P), cos(2pi t/P)] where congestion is the
    unoccupied fraction of the region and inflow/outflow count agents
    whose previous goal crosses into/out of the region, normalized by
    N_t. Edge layout: [length, 1/(1+length), demand-supply hint,
    corridor load]. Pure function of its inputs.
    """
    k = partition.n_regions
    region_of = partition.region_of
    sizes = partition.region_sizes
    free = schedulable_free_agents(state, partition)
    n_free = len(free)
    free_set = set(free)

    agents_in = np.zeros(k, dtype=np.float64)
    free_in = np.zeros(k, dtype=np.float64)
    for agent, pos in state.positions.items():
        region = region_of[pos]
        if region == ORPHAN_REGION:
            continue
        agents_in[region] += 1
        if agent in free_set:
            free_in[region] += 1

    task_counts = np.zeros(k, dtype=np.float64)
    for task in state.pool.open.values():
        region = region_of[task.current_errand]
        if region != ORPHAN_REGION:
            task_counts[region] += 1
    free_task_counts = _free_task_counts(state, partition)

    inflow = np.zeros(k, dtype=np.float64)
    outflow = np.zeros(k, dtype=np.float64)
    if prev_goal_map is not None:
        for agent, goal in prev_goal_map.goals.items():
            pos = state.positions.get(agent)
            if pos is None:
                continue
            src = region_of[pos]
            dst = region_of[goal.cell]
            if src == ORPHAN_REGION or dst == ORPHAN_REGION or src == dst:
                continue
            inflow[dst] += 1
            outflow[src] += 1

    node = np.zeros((k, NODE_FEATURES), dtype=np.float64)
    width = partition.gmap.width
    height = partition.gmap.height
    for i in range(k):
        size = float(sizes[i])
        node[i, 0] = agents_in[i] / size
        node[i, 1] = free_in[i] / n_free if n_free else 0.0
        node[i, 2] = task_counts[i] / size
        node[i, 3] = free_task_counts[i] / n_free if n_free else 0.0
        node[i, 4] = min(1.0, max(0.0, 1.0 - agents_in[i] / size))
        node[i, 5] = inflow[i] / n_free if n_free else 0.0
        node[i, 6] = outflow[i] / n_free if n_free else 0.0
        x, y = partition.gmap.cell_xy(partition.seeds[i])
        ax = 2.0 * math.pi * x / width
        ay = 2.0 * math.pi * y / height
        node[i, 7] = math.sin(ax)
        node[i, 8] = math.cos(ax)
        node[i, 9] = math.sin(ay)
        node[i, 10] = math.cos(ay)
    at = 2.0 * math.pi * (state.t % period) / period
    node[:, 11] = math.sin(at)
    node[:, 12] = math.cos(at)

    # nearest free agent per free task, for the demand-supply hint
    nearest_region = {}
    if cache is not None and free:
        for task in free_tasks(state.pool, state.allow_reassign):
            errand = task.current_errand
            if region_of[errand] == ORPHAN_REGION:
                continue
            dists = cache.to_cell(errand)
            best_d = None
            best_agent = None
            for agent in free:
                d = dists[state.positions[agent]]
                if d == UNREACHABLE:
                    continue
                if best_d is None or d < best_d:
                    best_d = d
                    best_agent = agent
            if best_agent is not None:
                nearest_region.setdefault(
                    region_of[state.positions[best_agent]], {}
                ).setdefault(region_of[errand], 0)
                nearest_region[region_of[state.positions[best_agent]]][
                    region_of[errand]
                ] += 1

    occupied = set(state.positions.values())
    edges = partition.nh_edges
    edge = np.zeros((len(edges), EDGE_FEATURES), dtype=np.float64)
    for e, (i, j) in enumerate(edges):
        length = float(partition.region_dist[i, j])
        edge[e, 0] = length
        edge[e, 1] = 1.0 / (1.0 + length)
        hint = nearest_region.get(i, {}).get(j, 0)
        edge[e, 2] = hint / float(sizes[j])
        path = partition.representative_path(i, j)
        if path:
            onpath = sum(1 for c in path if c in occupied)
            edge[e, 3] = min(1.0, max(0.0, onpath / len(path)))
    node.setflags(write=False)
    edge.setflags(write=False)
    return FeatureGraph(
        node_feats=node, edge_feats=edge, edge_index=list(edges),
        t=state.t, n_free=n_free,
    )


def validate_reply(probs, k):
    """Check a raw reply vector and return a Distribution.

    Entries must be finite and nonnegative with the right length; sums
    within RENORM_TOLERANCE of 1 are renormalized, larger deviations
    are protocol errors.
    """
    try:
        arr = np.asarray(probs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"non-numeric probability in reply: {exc}")
    if arr.ndim != 1 or arr.shape[0] != k:
        raise ProtocolError(f"expected {k} probabilities, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ProtocolError("non-finite probability in reply")
    if np.any(arr < 0):
        raise ProtocolError("negative probability in reply")
    total = float(arr.sum())
    # absolute 1e-12 guard so a sum of exactly 0.999 in decimal is not
    # rejected by the last bit of its binary representation
    if abs(total - 1.0) > RENORM_TOLERANCE + 1e-12:
        raise ProtocolError(f"probabilities sum to {total}")
    if total <= 0:
        raise ProtocolError("probabilities sum to zero")
    return Distribution(arr / total)


class ExternalGuidanceClient:
    """NDJSON guidance client over child-process stdio or a TCP socket.

    Exactly one transport is chosen: cmd spawns a child process, addr
    connects to "host:port", and streams=(reader, writer) reuses open
    binary streams (used when the engine itself is the child of a
    trainer). Requests are answered within `deadline` seconds or the
    call raises Timeout.
    """

    def __init__(self, cmd=None, addr=None, streams=None,
                 deadline=DEFAULT_DEADLINE):
        chosen = sum(x is not None for x in (cmd, addr, streams))
        if chosen != 1:
            raise ValueError("exactly one of cmd/addr/streams required")
        self.deadline = deadline
        self._proc = None
        self._sock = None
        self._buf = b""
        if cmd is not None:
            self._proc = subprocess.Popen(
                shlex.split(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
            self._reader = self._proc.stdout
            self._writer = self._proc.stdin
        elif addr is not None:
            host, port = addr.rsplit(":", 1)
            self._sock = socket.create_connection((host, int(port)))
            self._sock.setblocking(False)
            self._reader = self._sock
            self._writer = self._sock
        else:
            self._reader, self._writer = streams

    def request(self, features, extra=None):
        """Send one request, return the raw probs list from the reply."""
        payload = {
            "t": features.t,
            "n_free": features.n_free,
            "nodes": features.node_feats.tolist(),
            "edges": [
                [src, dst] + feats.tolist()
                for (src, dst), feats in zip(
                    features.edge_index, features.edge_feats
                )
            ],
        }
        if extra:
            payload.update(extra)
        self.send_line(json.dumps(payload))
        reply = self.read_line(self.deadline)
        try:
            obj = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"reply is not JSON: {exc}")
        if not isinstance(obj, dict) or "probs" not in obj:
            raise ProtocolError("reply missing 'probs'")
        probs = obj["probs"]
        if not isinstance(probs, list):
            raise ProtocolError("'probs' is not a list")
        return probs

    def send_line(self, text):
        data = text.encode() + b"\n"
        if self._sock is not None:
            self._sock.sendall(data)
        else:
            self._writer.write(data)
            self._writer.flush()

    def read_line(self, deadline):
        """Read one newline-terminated reply within `deadline` seconds."""
        end = time.monotonic() + deadline
        fd = self._reader.fileno() if self._sock is None else self._sock.fileno()
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                line = self._buf[:nl]
                self._buf = self._buf[nl + 1:]
                return line.decode()
            remaining = end - time.monotonic()
            if remaining <= 0:
                raise Timeout(f"no reply within {deadline}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise Timeout(f"no reply within {deadline}s")
            if self._sock is not None:
                chunk = self._sock.recv(65536)
            else:
                chunk = os.read(fd, 65536)
            if not chunk:
                raise ProtocolError("guidance stream closed")
            self._buf += chunk

    def close(self):
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._sock is not None:
            self._sock.close()


def external_guidance(client, features, extra=None):
    """Query the external policy; validate the reply into a Distribution.

    Raises ProtocolError or Timeout; callers fall back to
    proportional_guidance and log the fault.
    """
    probs = client.request(features, extra=extra)
    return validate_reply(probs, len(features.node_feats))
