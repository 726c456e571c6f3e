"""Pure-Python kernels. Same signatures and results as ``_ckernels``."""

import numpy as np


def _aslist(a):
    return a.tolist() if isinstance(a, np.ndarray) else list(a)


def _between(test, left, right, l):
    if left == right:
        return True
    d = (test - left) % l
    return 0 < d <= (right - left) % l


def next_subscriber_table(owner, is_sub):
    """Converged next-subscriber position for every ring position.

    For position ``p`` this is the first position ccw after ``p`` whose owner
    subscribes and is not ``owner[p]``; ``-1`` when there is none.
    """
    owner, is_sub = _aslist(owner), _aslist(is_sub)
    l = len(owner)
    out = np.full(l, -1, dtype=np.int32)
    # first subscriber position strictly after p, ignoring ownership
    nxt = [-1] * l
    cur = -1
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
    return out


def route_publication(owner, pos_start, pos_list, pos_index, sc_start, sc_list,
                      ns, publisher):
    """Route one publication over static tables.

    Returns int32 arrays ``(src, dst, hops)``, one entry per transmission,
    in depth-first emission order.
    """
    owner, pos_start, pos_list, pos_index, sc_start, sc_list, ns = map(
        _aslist, (owner, pos_start, pos_list, pos_index, sc_start, sc_list, ns))
    l = len(owner)
    src, dst, hops = [], [], []
    base = pos_start[publisher]
    first = pos_list[base]
    stack = [(first, first, publisher, 0)]
    while stack:
        cur, ep, v, h = stack.pop()
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
            limit = (s - p) % l
            goal, best = (p + 1) % l, 1
            for t in range(sc_start[p], sc_start[p + 1]):
                c = sc_list[t]
                d = (c - p) % l
                if best < d <= limit:
                    goal, best = c, d
            src.append(p)
            dst.append(goal)
            hops.append(h + 1)
            stack.append((goal, new_ep, owner[goal], h + 1))
    return (np.asarray(src, dtype=np.int32), np.asarray(dst, dtype=np.int32),
            np.asarray(hops, dtype=np.int32))


def bfs_parents(adj_start, adj_list, source):
    """Layered BFS; each node's parent is its smallest-id neighbour one layer up.

    Returns int32 ``(parent, depth)``; unreachable nodes have depth ``-1``.
    """
    adj_start, adj_list = _aslist(adj_start), _aslist(adj_list)
    n = len(adj_start) - 1
    parent = [-1] * n
    depth = [-1] * n
    depth[source] = 0
    layer = [source]
    d = 0
    while layer:
        nxt = []
        for u in sorted(layer):
            for t in range(adj_start[u], adj_start[u + 1]):
                w = adj_list[t]
                if depth[w] == -1:
                    depth[w] = d + 1
                    parent[w] = u
                    nxt.append(w)
        layer = nxt
        d += 1
    return np.asarray(parent, dtype=np.int32), np.asarray(depth, dtype=np.int32)
