"""Time the compiled kernels against their pure-Python twins.

Runs each of the three numeric kernels on a warehouse-scale workload
with both implementations, checks they agree, and prints a speedup
table. Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from fleetflow.aggregation import select_seeds
from fleetflow.fixtures import warehouse_large
from fleetflow.kernels import _ckernels, _pykernels


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _workloads():
    gmap, stations = warehouse_large()
    seeds = np.asarray(select_seeds(gmap, stations), dtype=np.int32)
    rng = np.random.default_rng(0)
    k = len(seeds)
    cost = rng.integers(1, 40, size=(k, k)).astype(np.int64)
    np.fill_diagonal(cost, 0)
    supply = rng.multinomial(200, np.full(k, 1.0 / k)).astype(np.int64)
    demand = rng.multinomial(200, np.full(k, 1.0 / k)).astype(np.int64)
    sources = [int(s) for s in seeds[:16]]
    return {
        "bfs_fill (16 sources)": lambda impl: [
            impl.bfs_fill(gmap.indptr, gmap.indices, s) for s in sources
        ],
        f"voronoi_bfs ({k} seeds)": lambda impl: impl.voronoi_bfs(
            gmap.indptr, gmap.indices, seeds),
        f"transport ({k}x{k}, 200 units)": lambda impl: impl.transport(
            cost, supply, demand),
    }


def _check_agreement(work):
    for name, fn in work.items():
        got_c, got_py = fn(_ckernels), fn(_pykernels)
        flat_c = np.concatenate([np.ravel(np.asarray(x)) for x in
                                 (got_c if isinstance(got_c, (tuple, list))
                                  else [got_c])])
        flat_py = np.concatenate([np.ravel(np.asarray(x)) for x in
                                  (got_py if isinstance(got_py, (tuple, list))
                                   else [got_py])])
        if not np.array_equal(flat_c, flat_py):
            raise SystemExit(f"implementations disagree on {name}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of N timings per cell")
    args = parser.parse_args()

    if _ckernels is None:
        raise SystemExit("compiled kernels are not built; nothing to compare")

    work = _workloads()
    _check_agreement(work)

    header = f"{'kernel':<34} {'compiled':>12} {'pure':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, fn in work.items():
        t_c = _best_of(lambda: fn(_ckernels), args.repeats)
        t_py = _best_of(lambda: fn(_pykernels), args.repeats)
        print(f"{name:<34} {t_c * 1e3:>10.2f}ms {t_py * 1e3:>10.2f}ms "
              f"{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
