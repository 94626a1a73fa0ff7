# cython: language_level=3
"""Compiled implementations of the numeric kernels.

Loop-for-loop transcription of `_pykernels`; both must produce
bit-identical outputs. See that module for algorithm notes.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef long long _INF = 2305843009213693951LL  # int64 max // 4


def bfs_fill(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices, int source):
    """Breadth-first distances from one source; -1 marks unreachable."""
    cdef int n = indptr.shape[0] - 1
    dist_arr = np.full(n, -1, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int32)
    cdef cnp.int32_t[::1] dist = dist_arr
    cdef cnp.int32_t[::1] queue = queue_arr
    cdef int head = 0, tail = 1
    cdef int u, v, e
    cdef cnp.int32_t du
    dist[source] = 0
    queue[0] = source
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
    return dist_arr


def voronoi_bfs(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices,
                cnp.int32_t[::1] seeds):
    """Multi-source BFS labelling each node with its nearest seed."""
    cdef int n = indptr.shape[0] - 1
    dist_arr = np.full(n, -1, dtype=np.int32)
    label_arr = np.full(n, -1, dtype=np.int32)
    frontier_arr = np.empty(n, dtype=np.int32)
    nxt_arr = np.empty(n, dtype=np.int32)
    cdef cnp.int32_t[::1] dist = dist_arr
    cdef cnp.int32_t[::1] label = label_arr
    cdef cnp.int32_t[::1] frontier = frontier_arr
    cdef cnp.int32_t[::1] nxt = nxt_arr
    cdef cnp.int32_t[::1] tmp
    cdef int fsize = 0, nsize, k, s, d, idx, u, v, e
    cdef cnp.int32_t lu
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
        tmp = frontier
        frontier = nxt
        nxt = tmp
        fsize = nsize
        d += 1
    return dist_arr, label_arr


def transport(cnp.int64_t[:, ::1] cost, cnp.int64_t[::1] supply,
              cnp.int64_t[::1] demand):
    """Minimum-cost integral transportation via successive shortest paths."""
    cdef int m = supply.shape[0]
    cdef int n = demand.shape[0]
    flow_arr = np.zeros((m, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] flow = flow_arr
    s_rem_arr = np.empty(m, dtype=np.int64)
    d_rem_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] s_rem = s_rem_arr
    cdef cnp.int64_t[::1] d_rem = d_rem_arr
    pot_s_arr = np.zeros(m, dtype=np.int64)
    pot_d_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] pot_s = pot_s_arr
    cdef cnp.int64_t[::1] pot_d = pot_d_arr
    dist_s_arr = np.empty(m, dtype=np.int64)
    dist_d_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] dist_s = dist_s_arr
    cdef cnp.int64_t[::1] dist_d = dist_d_arr
    done_s_arr = np.empty(m, dtype=np.int8)
    done_d_arr = np.empty(n, dtype=np.int8)
    cdef cnp.int8_t[::1] done_s = done_s_arr
    cdef cnp.int8_t[::1] done_d = done_d_arr
    par_d_arr = np.empty(n, dtype=np.int32)
    par_s_arr = np.empty(m, dtype=np.int32)
    cdef cnp.int32_t[::1] par_d = par_d_arr
    cdef cnp.int32_t[::1] par_s = par_s_arr

    cdef long long remaining = 0, best, base, w, c, amt, total, cap
    cdef int i, j, bi, jt
    cdef bint bsup

    for i in range(m):
        s_rem[i] = supply[i]
    for j in range(n):
        d_rem[j] = demand[j]
        remaining += demand[j]

    while remaining > 0:
        for i in range(m):
            dist_s[i] = _INF
            done_s[i] = 0
            par_s[i] = -1
            if s_rem[i] > 0:
                dist_s[i] = 0
        for j in range(n):
            dist_d[j] = _INF
            done_d[j] = 0
            par_d[j] = -1
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
                    return flow_arr, 0, j
        amt = d_rem[jt]
        j = jt
        while True:
            i = par_d[j]
            if par_s[i] < 0:
                if s_rem[i] < amt:
                    amt = s_rem[i]
                break
            j = par_s[i]
            if flow[i, j] < amt:
                amt = flow[i, j]
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
            if flow[i, j] > 0:
                total += flow[i, j] * cost[i, j]
    return flow_arr, total, -1
