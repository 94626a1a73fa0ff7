"""Grid maps: parsing, adjacency, and BFS distance fields.

Maps use the MovingAI text format ('.' traversable, '@'/'T' blocked).
Cells are numbered row-major: cell = y * width + x, with x growing east
and y growing south. Movement is 4-connected; waiting is always legal
on a traversable cell (the self-loop is implicit and never stored in
the adjacency arrays).

An optional sidecar file next to a map lists station cells ("x,y") and
one-way aisle edges ("x,y,D" with D in NESW, keeping only the arc from
(x,y) toward D and removing the reverse arc).
"""

from dataclasses import dataclass, field

import numpy as np

from fleetflow import kernels
from fleetflow.errors import (
    ConfigError,
    MalformedHeader,
    RowLengthMismatch,
    SourceBlocked,
    StationBlocked,
    UnknownCell,
)

UNREACHABLE = -1

# Fixed direction order (dx, dy); y grows downward, so N is -y.
DIRECTIONS = (("N", 0, -1), ("E", 1, 0), ("S", 0, 1), ("W", -1, 0))
_DIR_DELTA = {name: (dx, dy) for name, dx, dy in DIRECTIONS}


@dataclass(frozen=True)
class GridMap:
    """Immutable grid world with directed CSR adjacency.

    indptr/indices hold outgoing arcs, rindptr/rindices incoming arcs.
    Blocked cells have no arcs. Safe to share across workers.
    """

    width: int
    height: int
    traversable: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    rindptr: np.ndarray
    rindices: np.ndarray
    n_traversable: int
    _trav_cells: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def from_grid(traversable, width, height, one_way=()):
        """Build a GridMap from a flat boolean array of traversable cells.

        one_way entries are directed arcs (u, v) between neighboring
        traversable cells; for each, the reverse arc (v, u) is removed.
        """
        trav = np.asarray(traversable, dtype=bool).reshape(width * height)
        removed = {(v, u) for (u, v) in one_way}
        n = width * height
        counts = np.zeros(n + 1, dtype=np.int32)
        edges = []
        for cell in range(n):
            if not trav[cell]:
                continue
            x = cell % width
            y = cell // width
            for _, dx, dy in DIRECTIONS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height:
                    ncell = ny * width + nx
                    if trav[ncell] and (cell, ncell) not in removed:
                        edges.append((cell, ncell))
                        counts[cell + 1] += 1
        indptr = np.cumsum(counts, dtype=np.int32)
        indices = np.fromiter(
            (v for _, v in edges), dtype=np.int32, count=len(edges)
        )
        rcounts = np.zeros(n + 1, dtype=np.int32)
        for _, v in edges:
            rcounts[v + 1] += 1
        rindptr = np.cumsum(rcounts, dtype=np.int32)
        rfill = rindptr[:-1].copy()
        rindices = np.empty(len(edges), dtype=np.int32)
        for u, v in edges:
            rindices[rfill[v]] = u
            rfill[v] += 1
        gmap = GridMap(
            width=width,
            height=height,
            traversable=trav,
            indptr=indptr,
            indices=indices,
            rindptr=rindptr,
            rindices=rindices,
            n_traversable=int(trav.sum()),
        )
        object.__setattr__(
            gmap, "_trav_cells", np.flatnonzero(trav).astype(np.int32)
        )
        return gmap

    # --- cell helpers ---

    def cell_id(self, x, y):
        return y * self.width + x

    def cell_xy(self, cell):
        return cell % self.width, cell // self.width

    def in_bounds(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height

    def is_traversable(self, cell):
        return bool(self.traversable[cell])

    def traversable_cells(self):
        """All traversable cell ids, ascending."""
        return self._trav_cells

    def neighbors(self, cell):
        """Outgoing neighbor cells (self-loop not included)."""
        return self.indices[self.indptr[cell]:self.indptr[cell + 1]]

    def in_neighbors(self, cell):
        return self.rindices[self.rindptr[cell]:self.rindptr[cell + 1]]

    def has_arc(self, u, v):
        """True if u→v is a legal move (including waiting, u == v)."""
        if u == v:
            return self.is_traversable(u)
        return v in self.neighbors(u)

    def traversable_neighbor_count(self, cell):
        """Geometric degree: traversable 4-neighbors regardless of arcs."""
        x, y = self.cell_xy(cell)
        count = 0
        for _, dx, dy in DIRECTIONS:
            nx, ny = x + dx, y + dy
            if self.in_bounds(nx, ny) and self.traversable[ny * self.width + nx]:
                count += 1
        return count


@dataclass(frozen=True)
class DistField:
    """BFS distances from (or, when reverse, toward) a source cell.

    dist[v] = steps along directed arcs; UNREACHABLE where no path
    exists. reverse=True means dist[v] is the distance v → source.
    """

    source: int
    dist: np.ndarray
    reverse: bool = False


def parse_map(text):
    """Parse MovingAI map text into a GridMap (no sidecar applied)."""
    lines = [line.rstrip("\r\n") for line in text.splitlines()]
    header = {}
    row_start = None
    for idx, line in enumerate(lines):
        stripped = line.strip()
        if stripped == "map":
            row_start = idx + 1
            break
        parts = stripped.split()
        if len(parts) == 2:
            header[parts[0].lower()] = parts[1]
    if row_start is None:
        raise MalformedHeader("missing 'map' header line")
    try:
        height = int(header["height"])
        width = int(header["width"])
    except (KeyError, ValueError) as exc:
        raise MalformedHeader(f"missing or non-integer height/width: {exc}")
    if height < 1 or width < 1:
        raise MalformedHeader(f"non-positive dimensions {width}x{height}")
    rows = [line for line in lines[row_start:] if line.strip() != ""]
    if len(rows) != height:
        raise MalformedHeader(
            f"expected {height} map rows, found {len(rows)}"
        )
    trav = np.zeros(width * height, dtype=bool)
    for y, row in enumerate(rows):
        if len(row) != width:
            raise RowLengthMismatch(
                f"row {y} has {len(row)} cells, header says {width}"
            )
        for x, ch in enumerate(row):
            if ch == ".":
                trav[y * width + x] = True
            elif ch in ("@", "T"):
                pass
            else:
                raise UnknownCell(f"row {y} col {x}: {ch!r}")
    return GridMap.from_grid(trav, width, height)


def parse_sidecar(text):
    """Parse sidecar lines into ([(x, y)] stations, [(x, y, dir)] one-ways)."""
    stations = []
    one_ways = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            if len(parts) == 2:
                stations.append((int(parts[0]), int(parts[1])))
            elif len(parts) == 3:
                if parts[2] not in _DIR_DELTA:
                    raise ValueError(f"direction {parts[2]!r}")
                one_ways.append((int(parts[0]), int(parts[1]), parts[2]))
            else:
                raise ValueError("expected 2 or 3 fields")
        except ValueError as exc:
            raise ConfigError(f"sidecar line {lineno}: {exc}")
    return stations, one_ways


def load_map(path, sidecar_path=None):
    """Load a map file plus optional sidecar.

    The sidecar defaults to '<path>.sidecar' when present. Returns
    (GridMap, station cell ids sorted ascending).
    """
    import os

    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if sidecar_path is None:
        candidate = str(path) + ".sidecar"
        sidecar_path = candidate if os.path.exists(candidate) else None
    stations_xy = []
    one_ways = []
    if sidecar_path is not None:
        with open(sidecar_path, encoding="utf-8") as fh:
            stations_xy, one_ways = parse_sidecar(fh.read())
    base = parse_map(text)
    one_way_arcs = []
    for x, y, dname in one_ways:
        if not base.in_bounds(x, y):
            raise ConfigError(f"one-way cell ({x},{y}) out of bounds")
        dx, dy = _DIR_DELTA[dname]
        nx, ny = x + dx, y + dy
        if not base.in_bounds(nx, ny):
            raise ConfigError(f"one-way ({x},{y},{dname}) points off-map")
        one_way_arcs.append((base.cell_id(x, y), base.cell_id(nx, ny)))
    gmap = base
    if one_way_arcs:
        gmap = GridMap.from_grid(
            base.traversable, base.width, base.height, one_way=one_way_arcs
        )
    stations = []
    for x, y in stations_xy:
        if not gmap.in_bounds(x, y) or not gmap.is_traversable(gmap.cell_id(x, y)):
            raise StationBlocked(f"station ({x},{y}) is blocked or off-map")
        stations.append(gmap.cell_id(x, y))
    return gmap, sorted(set(stations))


def dist_field(gmap, source, reverse=False):
    """BFS distance field from source (reverse=True: toward source)."""
    if not gmap.is_traversable(source):
        raise SourceBlocked(f"cell {source} is not traversable")
    if reverse:
        dist = kernels.bfs_fill(gmap.rindptr, gmap.rindices, int(source))
    else:
        dist = kernels.bfs_fill(gmap.indptr, gmap.indices, int(source))
    dist.setflags(write=False)
    return DistField(source=int(source), dist=dist, reverse=reverse)


class DistCache:
    """Memoized distance fields, keyed by cell and direction.

    to_cell(c)[v] gives the directed distance v → c, so one field per
    goal cell serves every agent; from_cell(c)[v] gives c → v.
    """

    def __init__(self, gmap):
        self.gmap = gmap
        self._to = {}
        self._from = {}

    def to_cell(self, cell):
        fieldv = self._to.get(cell)
        if fieldv is None:
            fieldv = dist_field(self.gmap, cell, reverse=True).dist
            self._to[cell] = fieldv
        return fieldv

    def from_cell(self, cell):
        fieldv = self._from.get(cell)
        if fieldv is None:
            fieldv = dist_field(self.gmap, cell, reverse=False).dist
            self._from[cell] = fieldv
        return fieldv

    def dist(self, u, v):
        """Directed distance u → v (UNREACHABLE if none)."""
        return int(self.to_cell(v)[u])
