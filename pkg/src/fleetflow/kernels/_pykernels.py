"""Pure-Python reference implementations of the numeric kernels.

These mirror the compiled module `_ckernels` loop for loop; the two must
produce bit-identical outputs (the test suite runs them against each
other). The compiled module is preferred at import time when available.

All graph kernels take CSR adjacency (indptr, indices) over n nodes.
The arrays never contain self-loops; waiting semantics live above this
layer.
"""

import numpy as np

_INF = np.iinfo(np.int64).max // 4


def bfs_fill(indptr, indices, source):
    """Breadth-first distances from one source; -1 marks unreachable."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return dist


def voronoi_bfs(indptr, indices, seeds):
    """Multi-source BFS labelling each node with its nearest seed.

    Returns (dist, label) where label[v] is the POSITION in `seeds` of
    the nearest seed, with exact lowest-position tie-breaking: labels
    propagate layer by layer and every node takes the minimum label
    over all of its shortest-path predecessors, so ties at equal
    distance always resolve to the smallest seed position. Unreached
    nodes carry -1 in both arrays.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    label = np.full(n, -1, dtype=np.int32)
    frontier = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    fsize = 0
    for k in range(seeds.shape[0]):
        s = seeds[k]
        if dist[s] < 0:
            dist[s] = 0
            label[s] = k
            frontier[fsize] = s
            fsize += 1
    d = 0
    while fsize > 0:
        nsize = 0
        for idx in range(fsize):
            u = frontier[idx]
            lu = label[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if dist[v] < 0:
                    dist[v] = d + 1
                    label[v] = lu
                    nxt[nsize] = v
                    nsize += 1
                elif dist[v] == d + 1 and lu < label[v]:
                    label[v] = lu
        frontier, nxt = nxt, frontier
        fsize = nsize
        d += 1
    return dist, label


def transport(cost, supply, demand):
    """Minimum-cost integral transportation via successive shortest paths.

    cost is an int64 matrix where -1 marks an unusable (unreachable)
    route; supply/demand are balanced int64 vectors. Returns
    (flow, total_cost, bad_demand) with bad_demand = -1 on success or
    the index of a demand that cannot be served (flow is then partial).

    Deterministic: node finalization prefers lower distance, then
    supply nodes over demand nodes, then lower index; parent pointers
    update only on strict improvement under a fixed scan order.
    """
    m = supply.shape[0]
    n = demand.shape[0]
    flow = np.zeros((m, n), dtype=np.int64)
    s_rem = supply.astype(np.int64).copy()
    d_rem = demand.astype(np.int64).copy()
    pot_s = np.zeros(m, dtype=np.int64)
    pot_d = np.zeros(n, dtype=np.int64)
    dist_s = np.empty(m, dtype=np.int64)
    dist_d = np.empty(n, dtype=np.int64)
    done_s = np.empty(m, dtype=np.int8)
    done_d = np.empty(n, dtype=np.int8)
    par_d = np.empty(n, dtype=np.int32)
    par_s = np.empty(m, dtype=np.int32)

    remaining = int(d_rem.sum())
    while remaining > 0:
        dist_s[:] = _INF
        dist_d[:] = _INF
        done_s[:] = 0
        done_d[:] = 0
        par_d[:] = -1
        par_s[:] = -1
        for i in range(m):
            if s_rem[i] > 0:
                dist_s[i] = 0
        while True:
            best = _INF
            bi = -1
            bsup = True
            for i in range(m):
                if not done_s[i] and dist_s[i] < best:
                    best = dist_s[i]
                    bi = i
                    bsup = True
            for j in range(n):
                if not done_d[j] and dist_d[j] < best:
                    best = dist_d[j]
                    bi = j
                    bsup = False
            if bi < 0:
                break
            if bsup:
                i = bi
                done_s[i] = 1
                base = dist_s[i]
                for j in range(n):
                    c = cost[i, j]
                    if c < 0 or done_d[j]:
                        continue
                    w = base + c - pot_s[i] - pot_d[j]
                    if w < dist_d[j]:
                        dist_d[j] = w
                        par_d[j] = i
            else:
                j = bi
                done_d[j] = 1
                base = dist_d[j]
                for i in range(m):
                    if flow[i, j] > 0 and not done_s[i]:
                        w = base + pot_s[i] + pot_d[j] - cost[i, j]
                        if w < dist_s[i]:
                            dist_s[i] = w
                            par_s[i] = j
        jt = -1
        best = _INF
        for j in range(n):
            if d_rem[j] > 0 and dist_d[j] < best:
                best = dist_d[j]
                jt = j
        if jt < 0:
            for j in range(n):
                if d_rem[j] > 0:
                    return flow, 0, j
        # bottleneck along the augmenting path
        amt = int(d_rem[jt])
        j = jt
        while True:
            i = par_d[j]
            if par_s[i] < 0:
                if s_rem[i] < amt:
                    amt = int(s_rem[i])
                break
            j = par_s[i]
            if flow[i, j] < amt:
                amt = int(flow[i, j])
        # apply the augmentation
        j = jt
        while True:
            i = par_d[j]
            flow[i, j] += amt
            if par_s[i] < 0:
                s_rem[i] -= amt
                break
            j = par_s[i]
            flow[i, j] -= amt
        d_rem[jt] -= amt
        remaining -= amt
        # potential update keeps reduced costs nonnegative
        cap = best
        for i in range(m):
            if dist_s[i] < cap:
                pot_s[i] -= dist_s[i]
            else:
                pot_s[i] -= cap
        for j in range(n):
            if dist_d[j] < cap:
                pot_d[j] += dist_d[j]
            else:
                pot_d[j] += cap

    total = 0
    for i in range(m):
        for j in range(n):
            f = flow[i, j]
            if f > 0:
                total += int(f) * int(cost[i, j])
    return flow, total, -1
