"""Numeric kernel facade: compiled extension with pure-Python fallback.

The compiled module is used when it imported successfully and the
FLEETFLOW_PURE environment variable is unset/empty; otherwise the
pure-Python twin takes over. Both expose the same three functions with
bit-identical outputs:

  bfs_fill(indptr, indices, source)      -> dist
  voronoi_bfs(indptr, indices, seeds)    -> (dist, label)
  transport(cost, supply, demand)        -> (flow, total, bad_demand)
"""

import os

from fleetflow.kernels import _pykernels

try:
    from fleetflow.kernels import _ckernels
except ImportError:  # pragma: no cover - build-env dependent
    _ckernels = None

if _ckernels is not None and not os.environ.get("FLEETFLOW_PURE"):
    _impl = _ckernels
    HAVE_COMPILED = True
else:
    _impl = _pykernels
    HAVE_COMPILED = False

bfs_fill = _impl.bfs_fill
voronoi_bfs = _impl.voronoi_bfs
transport = _impl.transport

__all__ = [
    "HAVE_COMPILED",
    "bfs_fill",
    "voronoi_bfs",
    "transport",
    "_pykernels",
    "_ckernels",
]
