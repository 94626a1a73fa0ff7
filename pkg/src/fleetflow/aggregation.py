"""Seed selection and shortest-path Voronoi partitioning.

Seeds are aisle intersections (traversable cells with at least 3
traversable 4-neighbors) plus station cells. Every traversable cell
joins the region of the seed nearest by directed graph distance, ties
to the lowest seed index. Seed-to-seed distances feed the rebalancing
cost matrix, and pairs within epsilon form the neighborhood edge set
used by guidance features.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from fleetflow import kernels
from fleetflow.errors import ConfigError, SeedUnreachable, SourceBlocked, StationBlocked
from fleetflow.grid_map import UNREACHABLE

ORPHAN_REGION = -1


@dataclass
class RegionPartition:
    """Voronoi partition of a map's traversable cells around seeds.

    region_of[cell] is the seed index owning the cell, ORPHAN_REGION
    for blocked cells and for traversable cells that cannot reach any
    seed (those are excluded from scheduling). region_dist[i][j] is the
    directed seed-to-seed distance with UNREACHABLE sentinel. nh_edges
    are directed pairs (i, j), i != j, with finite distance <= epsilon.
    Immutable after construction apart from internal lazy caches.
    """

    gmap: object
    seeds: list
    region_of: np.ndarray
    dist_to_seed: np.ndarray
    region_dist: np.ndarray
    nh_edges: list
    epsilon: int
    region_sizes: np.ndarray
    orphans: list
    seed_fields: list = field(repr=False, default=None)
    _cells: dict = field(repr=False, default_factory=dict)
    _wp_order: dict = field(repr=False, default_factory=dict)
    _paths: dict = field(repr=False, default_factory=dict)

    @property
    def n_regions(self):
        return len(self.seeds)

    def compression(self):
        """|V_agg| over traversable cell count."""
        return self.n_regions / self.gmap.n_traversable

    def cells_in_region(self, i):
        cells = self._cells.get(i)
        if cells is None:
            cells = np.flatnonzero(self.region_of == i).astype(np.int32)
            self._cells[i] = cells
        return cells

    def waypoint_order(self, i):
        """Region i's cells in BFS order from its seed (ties by cell id).

        Cells the seed cannot reach (possible on one-way maps) sort
        last, by id.
        """
        order = self._wp_order.get(i)
        if order is None:
            cells = self.cells_in_region(i)
            fwd = self.seed_fields[i]
            keys = fwd[cells].astype(np.int64)
            keys[keys == UNREACHABLE] = np.iinfo(np.int64).max // 2
            order = cells[np.lexsort((cells, keys))]
            self._wp_order[i] = order
        return order

    def representative_path(self, i, j):
        """One shortest seed_i -> seed_j path, lowest-cell-id parents.

        Returns a list of cells including both endpoints, or None when
        unreachable.
        """
        key = (i, j)
        if key in self._paths:
            return self._paths[key]
        fwd = self.seed_fields[i]
        target = self.seeds[j]
        path = None
        if fwd[target] != UNREACHABLE:
            path = [target]
            v = target
            while v != self.seeds[i]:
                dv = fwd[v]
                best = -1
                for u in self.gmap.in_neighbors(v):
                    if fwd[u] == dv - 1 and (best < 0 or u < best):
                        best = int(u)
                v = best
                path.append(v)
            path.reverse()
        self._paths[key] = path
        return path


def select_seeds(gmap, stations=()):
    """Aisle intersections plus stations, sorted by cell id.

    Falls back to a stride-k lattice of traversable cells when the
    union is empty (open rooms), choosing the largest k that still
    yields at least 4 seeds.
    """
    for s in stations:
        if not gmap.is_traversable(s):
            raise StationBlocked(f"station cell {s} is blocked")
    seeds = {int(c) for c in gmap.traversable_cells()
             if gmap.traversable_neighbor_count(c) >= 3}
    seeds.update(int(s) for s in stations)
    if seeds:
        return sorted(seeds)
    lattice = []
    for k in range(min(gmap.width, gmap.height), 0, -1):
        lattice = [
            int(c) for c in gmap.traversable_cells()
            if (c % gmap.width) % k == 0 and (c // gmap.width) % k == 0
        ]
        if len(lattice) >= 4:
            return lattice
    return lattice


def auto_epsilon(region_dist):
    """Smallest epsilon keeping at least 90% of all directed pairs.

    Pairs with unreachable distance can never be kept; when they push
    the reachable share below 90%, the largest finite distance is used.
    """
    k = region_dist.shape[0]
    if k <= 1:
        return 0
    off = region_dist[~np.eye(k, dtype=bool)]
    finite = np.sort(off[off != UNREACHABLE])
    if finite.size == 0:
        return 0
    target = math.ceil(0.9 * k * (k - 1))
    if finite.size < target:
        return int(finite[-1])
    return int(finite[target - 1])


def build_partition(gmap, seeds, epsilon=None):
    """Build the Voronoi partition and neighborhood graph.

    epsilon=None selects the 90%-coverage default via auto_epsilon.
    Traversable cells unable to reach any seed trigger a
    SeedUnreachable warning and join ORPHAN_REGION.
    """
    seeds = sorted({int(s) for s in seeds})
    if not seeds:
        raise ConfigError("partition needs at least one seed")
    for s in seeds:
        if not gmap.is_traversable(s):
            raise SourceBlocked(f"seed cell {s} is not traversable")
    seed_arr = np.asarray(seeds, dtype=np.int32)
    # Distance v -> seed follows outgoing arcs from v, so the
    # multi-source sweep runs over the reverse adjacency.
    dist_to_seed, region_of = kernels.voronoi_bfs(
        gmap.rindptr, gmap.rindices, seed_arr
    )
    orphans = [
        int(c) for c in gmap.traversable_cells() if region_of[c] == ORPHAN_REGION
    ]
    if orphans:
        warnings.warn(
            SeedUnreachable(
                f"{len(orphans)} traversable cells reach no seed; "
                "assigned to the orphan region and excluded from scheduling"
            )
        )
    k = len(seeds)
    seed_fields = [
        kernels.bfs_fill(gmap.indptr, gmap.indices, s) for s in seeds
    ]
    region_dist = np.empty((k, k), dtype=np.int64)
    for i in range(k):
        region_dist[i, :] = seed_fields[i][seed_arr]
    if epsilon is None:
        epsilon = auto_epsilon(region_dist)
    epsilon = int(epsilon)
    nh_edges = [
        (i, j)
        for i in range(k)
        for j in range(k)
        if i != j and region_dist[i, j] != UNREACHABLE
        and region_dist[i, j] <= epsilon
    ]
    region_sizes = np.bincount(
        region_of[region_of >= 0], minlength=k
    ).astype(np.int64)
    region_of = region_of.copy()
    region_of.setflags(write=False)
    return RegionPartition(
        gmap=gmap,
        seeds=seeds,
        region_of=region_of,
        dist_to_seed=dist_to_seed,
        region_dist=region_dist,
        nh_edges=nh_edges,
        epsilon=epsilon,
        region_sizes=region_sizes,
        orphans=orphans,
        seed_fields=seed_fields,
    )
