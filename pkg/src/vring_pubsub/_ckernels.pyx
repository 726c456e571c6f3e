# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same signatures and results as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline int _mod(int a, int l) nogil:
    cdef int r = a % l
    return r + l if r < 0 else r


cdef inline bint _between(int test, int left, int right, int l) nogil:
    if left == right:
        return True
    cdef int d = _mod(test - left, l)
    return 0 < d and d <= _mod(right - left, l)


def next_subscriber_table(owner_in, is_sub_in):
    cdef const int[::1] owner = np.ascontiguousarray(owner_in, dtype=np.int32)
    cdef const unsigned char[::1] is_sub = np.ascontiguousarray(is_sub_in, dtype=np.uint8)
    cdef int l = owner.shape[0]
    out_arr = np.full(l, -1, dtype=np.int32)
    nxt_arr = np.full(l, -1, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef int[::1] nxt = nxt_arr
    cdef int k, p, q, hops
    cdef int cur = -1
    with nogil:
        for k in range(2 * l - 1, -1, -1):
            p = k % l
            if k < l:
                nxt[p] = cur
            if is_sub[owner[p]]:
                cur = p
        for p in range(l):
            q = nxt[p]
            hops = 0
            while q != -1 and owner[q] == owner[p] and hops < l:
                q = nxt[q]
                hops += 1
            if q != -1 and owner[q] != owner[p]:
                out[p] = q
    return out_arr


def route_publication(owner_in, pos_start_in, pos_list_in, pos_index_in,
                      sc_start_in, sc_list_in, ns_in, int publisher):
    cdef const int[::1] owner = np.ascontiguousarray(owner_in, dtype=np.int32)
    cdef const int[::1] pos_start = np.ascontiguousarray(pos_start_in, dtype=np.int32)
    cdef const int[::1] pos_list = np.ascontiguousarray(pos_list_in, dtype=np.int32)
    cdef const int[::1] pos_index = np.ascontiguousarray(pos_index_in, dtype=np.int32)
    cdef const int[::1] sc_start = np.ascontiguousarray(sc_start_in, dtype=np.int32)
    cdef const int[::1] sc_list = np.ascontiguousarray(sc_list_in, dtype=np.int32)
    cdef const int[::1] ns = np.ascontiguousarray(ns_in, dtype=np.int32)
    cdef int l = owner.shape[0]
    # every transmission targets a distinct position, so l bounds both
    src_arr = np.empty(l, dtype=np.int32)
    dst_arr = np.empty(l, dtype=np.int32)
    hop_arr = np.empty(l, dtype=np.int32)
    cdef int[::1] src = src_arr
    cdef int[::1] dst = dst_arr
    cdef int[::1] hops = hop_arr
    cdef int *stack = <int *> malloc(4 * (l + 1) * sizeof(int))
    if stack == NULL:
        raise MemoryError()
    cdef int top = 0, ntx = 0
    cdef int cur, ep, v, h, b, m, i, k, p, q, new_ep, s, limit, goal, best, t, c, d
    try:
        with nogil:
            p = pos_list[pos_start[publisher]]
            stack[0] = p
            stack[1] = p
            stack[2] = publisher
            stack[3] = 0
            top = 1
            while top > 0:
                top -= 1
                cur = stack[4 * top]
                ep = stack[4 * top + 1]
                v = stack[4 * top + 2]
                h = stack[4 * top + 3]
                b = pos_start[v]
                m = pos_start[v + 1] - b
                i = pos_index[cur]
                for k in range(m):
                    p = pos_list[b + (i + k) % m]
                    if k > 0 and (p == ep or not _between(p, cur, ep, l)):
                        break
                    q = pos_list[b + (i + k + 1) % m]
                    new_ep = q if _between(q, p, ep, l) else ep
                    s = ns[p]
                    if s < 0 or s == new_ep or not _between(s, p, new_ep, l):
                        continue
                    limit = _mod(s - p, l)
                    goal = (p + 1) % l
                    best = 1
                    for t in range(sc_start[p], sc_start[p + 1]):
                        c = sc_list[t]
                        d = _mod(c - p, l)
                        if best < d and d <= limit:
                            goal = c
                            best = d
                    src[ntx] = p
                    dst[ntx] = goal
                    hops[ntx] = h + 1
                    ntx += 1
                    stack[4 * top] = goal
                    stack[4 * top + 1] = new_ep
                    stack[4 * top + 2] = owner[goal]
                    stack[4 * top + 3] = h + 1
                    top += 1
    finally:
        free(stack)
    return src_arr[:ntx].copy(), dst_arr[:ntx].copy(), hop_arr[:ntx].copy()


def bfs_parents(adj_start_in, adj_list_in, int source):
    cdef const int[::1] adj_start = np.ascontiguousarray(adj_start_in, dtype=np.int32)
    cdef const int[::1] adj_list = np.ascontiguousarray(adj_list_in, dtype=np.int32)
    cdef int n = adj_start.shape[0] - 1
    parent_arr = np.full(n, -1, dtype=np.int32)
    depth_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] parent = parent_arr
    cdef int[::1] depth = depth_arr
    # layers are contiguous in the queue; adjacency rows are sorted and each
    # layer is sorted before expansion so the first discoverer is the smallest id
    queue_arr = np.empty(max(n, 1), dtype=np.int32)
    cdef int[::1] queue = queue_arr
    cdef int head = 0, tail = 0, layer_end, u, w, t
    depth[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        layer_end = tail
        queue_arr[head:layer_end].sort()
        while head < layer_end:
            u = queue[head]
            head += 1
            for t in range(adj_start[u], adj_start[u + 1]):
                w = adj_list[t]
                if depth[w] == -1:
                    depth[w] = depth[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
    return parent_arr, depth_arr
