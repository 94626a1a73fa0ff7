"""Bundled benchmark maps: two warehouse layouts and an open room.

The warehouses are corridor grids (1-wide aisles) whose intersections
and perimeter stations become partition seeds; both come in under the
0.10 seed-to-traversable compression target. The small layout hosts
desk-scale throughput comparisons, the large one latency measurements
at 200 agents.
"""

from fleetflow.grid_map import parse_map, parse_sidecar

SMALL_NAME = "warehouse_small"
LARGE_NAME = "warehouse_large"
OPEN_NAME = "open10"

_SMALL_COLS = (0, 8, 17, 26, 34)
_SMALL_ROWS = (0, 7, 13, 20)
_SMALL_W, _SMALL_H = 35, 21
_SMALL_STATIONS = ((4, 0), (30, 0), (4, 20), (30, 20))

_LARGE_COLS = (0, 8, 17, 26, 34, 43, 51, 60, 68)
_LARGE_ROWS = (0, 7, 13, 20, 27, 34, 40)
_LARGE_W, _LARGE_H = 69, 41
_LARGE_STATIONS = (
    (4, 0), (30, 0), (56, 0), (0, 4), (68, 4), (4, 40), (30, 40), (56, 40),
)


def _corridor_map_text(width, height, cols, rows):
    lines = ["type octile", f"height {height}", f"width {width}", "map"]
    for y in range(height):
        row = "".join(
            "." if (x in cols or y in rows) else "@" for x in range(width)
        )
        lines.append(row)
    return "\n".join(lines) + "\n"


def _station_sidecar_text(stations):
    lines = ["# station cells (x,y)"]
    lines.extend(f"{x},{y}" for x, y in stations)
    return "\n".join(lines) + "\n"


def warehouse_small_text():
    """21x35 corridor warehouse; returns (map text, sidecar text)."""
    return (
        _corridor_map_text(_SMALL_W, _SMALL_H, _SMALL_COLS, _SMALL_ROWS),
        _station_sidecar_text(_SMALL_STATIONS),
    )


def warehouse_large_text():
    """41x69 corridor warehouse; returns (map text, sidecar text)."""
    return (
        _corridor_map_text(_LARGE_W, _LARGE_H, _LARGE_COLS, _LARGE_ROWS),
        _station_sidecar_text(_LARGE_STATIONS),
    )


def open_map_text(width=10, height=10):
    lines = ["type octile", f"height {height}", f"width {width}", "map"]
    lines.extend("." * width for _ in range(height))
    return "\n".join(lines) + "\n"


def _build(map_text, sidecar_text=None):
    gmap = parse_map(map_text)
    stations = []
    if sidecar_text:
        stations_xy, _ = parse_sidecar(sidecar_text)
        stations = sorted(gmap.cell_id(x, y) for x, y in stations_xy)
    return gmap, stations


def warehouse_small():
    """Built small warehouse: (GridMap, station cells)."""
    return _build(*warehouse_small_text())


def warehouse_large():
    """Built large warehouse: (GridMap, station cells)."""
    return _build(*warehouse_large_text())


def open_map(width=10, height=10):
    """Built open room with no stations: (GridMap, [])."""
    return _build(open_map_text(width, height))


def write_fixtures(outdir):
    """Write the bundled maps under outdir; returns the file paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = []
    for name, (map_text, sidecar_text) in (
        (SMALL_NAME, (warehouse_small_text())),
        (LARGE_NAME, (warehouse_large_text())),
        (OPEN_NAME, (open_map_text(), None)),
    ):
        map_path = os.path.join(outdir, f"{name}.map")
        with open(map_path, "w", encoding="utf-8") as fh:
            fh.write(map_text)
        paths.append(map_path)
        if sidecar_text:
            sidecar_path = map_path + ".sidecar"
            with open(sidecar_path, "w", encoding="utf-8") as fh:
                fh.write(sidecar_text)
            paths.append(sidecar_path)
    return paths
