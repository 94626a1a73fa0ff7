"""Command-line entry point: single runs, sweeps, partition inspection.

`run` executes one episode and writes metrics JSON; `sweep` runs a
cartesian grid of configs in parallel and writes a combined CSV;
`inspect-partition` prints the region structure of a map;
`gen-fixtures` writes the bundled warehouse maps. A JSON config file
mirrors every flag; explicit flags override file values. Exit code 1
means a configuration error, 2 a runtime error from the simulator.
"""

import argparse
import csv
import json
import logging
import sys
from multiprocessing import Pool

from fleetflow.aggregation import build_partition, select_seeds
from fleetflow.engine import CSV_HEADER, EpisodeConfig, run_episode
from fleetflow.errors import ConfigError, FleetflowError
from fleetflow.fixtures import (
    LARGE_NAME,
    OPEN_NAME,
    SMALL_NAME,
    open_map,
    warehouse_large,
    warehouse_small,
    write_fixtures,
)
from fleetflow.grid_map import load_map

log = logging.getLogger("fleetflow.cli")

BUNDLED = {
    SMALL_NAME: warehouse_small,
    LARGE_NAME: warehouse_large,
    OPEN_NAME: open_map,
}

RUN_DEFAULTS = {
    "map": None,
    "agents": 8,
    "tasks": 12,
    "horizon": 500,
    "scheduler": "greedy",
    "guidance": "proportional",
    "external_cmd": None,
    "external_addr": None,
    "external_stdio": False,
    "train_mode": False,
    "train_window": 50,
    "epsilon": None,
    "seed": 0,
    "no_reassign": False,
    "budget": 1.0,
    "period": 1000,
    "deadline": 0.2,
    "record_steps": False,
    "out": None,
}


def _add_run_flags(parser, sweep=False):
    many = (lambda cast: (lambda s: [cast(v) for v in s.split(",")])) if sweep \
        else (lambda cast: cast)
    parser.add_argument("--map", help="map file path or bundled fixture name")
    parser.add_argument("--agents", type=many(int))
    parser.add_argument("--tasks", type=many(int))
    parser.add_argument("--horizon", type=many(int))
    if sweep:
        parser.add_argument("--scheduler", type=many(str))
        parser.add_argument("--guidance", type=many(str))
        parser.add_argument("--seed", type=many(int))
    else:
        parser.add_argument("--scheduler", choices=("greedy", "gopt", "flow"))
        parser.add_argument("--guidance",
                            choices=("proportional", "uniform", "external"))
        parser.add_argument("--seed", type=int)
    parser.add_argument("--external-cmd")
    parser.add_argument("--external-addr")
    parser.add_argument("--external-stdio", action="store_const", const=True)
    parser.add_argument("--train-mode", action="store_const", const=True)
    parser.add_argument("--train-window", type=int)
    parser.add_argument("--epsilon", type=int)
    parser.add_argument("--no-reassign", action="store_const", const=True)
    parser.add_argument("--budget", type=float, help="per-step budget, seconds")
    parser.add_argument("--period", type=int, help="time-feature period, steps")
    parser.add_argument("--deadline", type=float,
                        help="external guidance reply deadline, seconds")
    parser.add_argument("--record-steps", action="store_const", const=True)
    parser.add_argument("--config", help="JSON file mirroring these flags")
    parser.add_argument("--out", help="metrics output path")


def build_parser():
    parser = argparse.ArgumentParser(prog="fleetflow")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one episode")
    _add_run_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run a cartesian grid of episodes")
    _add_run_flags(sweep_p, sweep=True)
    sweep_p.add_argument("--jobs", type=int, default=1)

    insp = sub.add_parser("inspect-partition", help="print region structure")
    insp.add_argument("--map", required=True)
    insp.add_argument("--epsilon", type=int)

    gen = sub.add_parser("gen-fixtures", help="write the bundled maps")
    gen.add_argument("--outdir", default=".")
    return parser


def _merge_settings(args):
    """File config under explicit flags under defaults."""
    settings = dict(RUN_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(RUN_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_cfg)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _resolve_map(name):
    if name is None:
        raise ConfigError("--map is required")
    if name in BUNDLED:
        gmap, stations = BUNDLED[name]()
        return gmap, stations, name
    gmap, stations = load_map(name)
    return gmap, stations, name


def _episode_config(settings):
    if settings["guidance"] == "external" and not (
        settings["external_cmd"] or settings["external_addr"]
        or settings["external_stdio"]
    ):
        raise ConfigError(
            "--guidance external requires --external-cmd, --external-addr, "
            "or --external-stdio"
        )
    gmap, stations, label = _resolve_map(settings["map"])
    return EpisodeConfig(
        gmap=gmap,
        stations=stations,
        map_name=label,
        n_agents=settings["agents"],
        n_tasks=settings["tasks"],
        horizon=settings["horizon"],
        scheduler=settings["scheduler"],
        guidance=settings["guidance"],
        external_cmd=settings["external_cmd"],
        external_addr=settings["external_addr"],
        external_streams="stdio" if settings["external_stdio"] else None,
        epsilon=settings["epsilon"],
        seed=settings["seed"],
        allow_reassign=not settings["no_reassign"],
        budget_s=settings["budget"],
        period=settings["period"],
        deadline=settings["deadline"],
        record_steps=settings["record_steps"],
        train_mode=settings["train_mode"],
        train_window=settings["train_window"],
    )


def cmd_run(args):
    settings = _merge_settings(args)
    if settings["external_stdio"] and not settings["out"]:
        raise ConfigError("--external-stdio needs --out (stdout is the wire)")
    config = _episode_config(settings)
    metrics = run_episode(config)
    doc = metrics.to_json(indent=2)
    if settings["out"]:
        with open(settings["out"], "w") as fh:
            fh.write(doc + "\n")
        print(
            f"throughput {metrics.throughput} conflicts "
            f"{metrics.conflicts_total} -> {settings['out']}",
            file=sys.stderr,
        )
    else:
        print(doc)
    return 0


def _sweep_grid(settings):
    axes = ("agents", "tasks", "horizon", "scheduler", "guidance", "seed")
    lists = {
        k: settings[k] if isinstance(settings[k], list) else [settings[k]]
        for k in axes
    }
    grid = [{}]
    for key in axes:
        grid = [dict(g, **{key: v}) for g in grid for v in lists[key]]
    return grid


def _run_cell(payload):
    settings = payload
    config = _episode_config(settings)
    return run_episode(config).csv_row()


def cmd_sweep(args):
    settings = _merge_settings(args)
    if not settings["out"]:
        raise ConfigError("sweep requires --out for the combined CSV")
    if settings["guidance"] == "external" or settings["external_stdio"]:
        raise ConfigError("sweep does not support external guidance")
    cells = [dict(settings, **cell) for cell in _sweep_grid(settings)]
    jobs = max(1, args.jobs)
    if jobs == 1:
        rows = [_run_cell(c) for c in cells]
    else:
        with Pool(jobs) as pool:
            rows = pool.map(_run_cell, cells)
    with open(settings["out"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
    print(f"{len(rows)} runs -> {settings['out']}", file=sys.stderr)
    return 0


def cmd_inspect(args):
    gmap, stations, label = _resolve_map(args.map)
    seeds = select_seeds(gmap, stations)
    partition = build_partition(gmap, seeds, args.epsilon)
    print(f"map {label}")
    print(f"traversable {gmap.n_traversable}")
    print(f"regions {partition.n_regions}")
    print(f"compression {partition.compression():.6f}")
    print(f"epsilon {partition.epsilon}")
    print(f"nh_edges {len(partition.nh_edges)}")
    print(f"orphans {len(partition.orphans)}")
    for i, seed in enumerate(partition.seeds):
        x, y = gmap.cell_xy(seed)
        print(f"seed {i} cell {seed} x {x} y {y} "
              f"size {partition.region_sizes[i]}")
    return 0


def cmd_gen_fixtures(args):
    paths = write_fixtures(args.outdir)
    for path in paths:
        print(path)
    return 0


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "sweep": cmd_sweep,
        "inspect-partition": cmd_inspect,
        "gen-fixtures": cmd_gen_fixtures,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FleetflowError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
