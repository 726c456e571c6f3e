"""Reference strategies the ring protocol is measured against.

* naive ring: hand the publication to every ring successor once around;
* T_D: a BFS tree per publisher, pruned to the subscribers;
* T_S: one BFS tree rooted at a central node, pruned per publication;
* Shen-style tree routing: a leased state machine forwarding into tree
  directions that hold subscribers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .pubsub import PubMeta, ProtocolError, RouteResult, SubMsg, Timings
from .ring import VirtualRing
from .topology import Graph, SpanningTree


def route_naive_ring(ring: VirtualRing, publisher: int, subscribers) -> RouteResult:
    """Forward once around the whole ring; ``l`` transmissions regardless of subscribers."""
    start = ring.pos[publisher][0]
    subs = set(subscribers) - {publisher}
    tx, hops, paths = [], {}, []
    p = start
    for h in range(1, ring.l + 1):
        q = ring.successor(p)
        tx.append((ring.owner[p], ring.owner[q]))
        paths.append((p, q))
        v = ring.owner[q]
        if v in subs:
            hops.setdefault(v, h)
        p = q
    return RouteResult(tx, hops, paths)


def _csr(g: Graph) -> tuple[np.ndarray, np.ndarray, int]:
    n = max(g.nodes) + 1
    adj = g.adjacency
    start = np.zeros(n + 1, dtype=np.int32)
    for v, nb in adj.items():
        start[v + 1] = len(nb)
    start = np.cumsum(start, dtype=np.int32)
    flat = np.zeros(int(start[-1]), dtype=np.int32)
    for v, nb in adj.items():
        flat[start[v]:start[v + 1]] = nb
    return start, flat, n


@dataclass
class BfsForest:
    """Per-source BFS trees of one graph, computed lazily."""

    graph: Graph
    _csr: tuple = field(init=False, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._csr = _csr(self.graph)

    def tree(self, source: int) -> tuple[np.ndarray, np.ndarray]:
        if source not in self._cache:
            start, flat, _ = self._csr
            self._cache[source] = kernels.bfs_parents(start, flat, source)
        return self._cache[source]


def _prune(parent: dict[int, int | None], keep: set[int]) -> set[tuple[int, int]]:
    """Strip non-terminal leaves until none remain; returns the surviving edges."""
    child_count: dict[int, int] = {v: 0 for v in parent}
    for v, p in parent.items():
        if p is not None:
            child_count[p] += 1
    alive = set(parent)
    leaves = [v for v in parent if child_count[v] == 0 and v not in keep]
    while leaves:
        v = leaves.pop()
        alive.discard(v)
        p = parent[v]
        if p is not None:
            child_count[p] -= 1
            if child_count[p] == 0 and p not in keep:
                leaves.append(p)
    return {(parent[v], v) for v in alive if parent[v] is not None}


def route_td(g: Graph, publisher: int, subscribers, forest: BfsForest | None = None) -> RouteResult:
    """BFS tree rooted at the publisher, leaves without subscribers pruned."""
    forest = forest or BfsForest(g)
    par, depth = forest.tree(publisher)
    parent = {v: (None if v == publisher else int(par[v])) for v in g.nodes}
    subs = set(subscribers) - {publisher}
    edges = _prune(parent, subs | {publisher})
    hops = {v: int(depth[v]) for v in subs}
    return RouteResult(sorted(edges), hops)


def route_ts(tree: SpanningTree, publisher: int, subscribers) -> RouteResult:
    """Minimal subtree of the shared tree spanning publisher and subscribers."""
    subs = set(subscribers) - {publisher}
    pub_path = tree.path_to_root(publisher)
    pub_index = {v: i for i, v in enumerate(pub_path)}
    used: set[tuple[int, int]] = set()
    hops = {}
    for s in subs:
        up = tree.path_to_root(s)
        k = next(i for i, v in enumerate(up) if v in pub_index)
        meet = up[k]
        down = pub_path[:pub_index[meet]]
        for a, b in zip(up[:k], up[1:k + 1]):
            used.add((b, a))
        for a, b in zip(down, down[1:] + [meet]):
            used.add((a, b))
        hops[s] = k + pub_index[meet]
    # orient edges away from the publisher
    return RouteResult(sorted(used), hops)


@dataclass(frozen=True, slots=True)
class TreePubMsg:
    channel: int
    data: bytes
    meta: PubMeta


@dataclass
class ShenNode:
    """Tree-routing subscriber-direction state machine with leased entries.

    ``directions[c][w]`` is the last renewal time of "some subscriber of ``c``
    lies behind neighbour ``w``". Entries stale beyond ``t_wb`` are dropped on
    the clean timer.
    """

    id: int
    n_channels: int
    timings: Timings
    parent: int | None = None
    children: tuple[int, ...] = ()
    subscribed: set[int] = field(default_factory=set)
    directions: list[dict[int, float]] = field(default_factory=list)
    timer_sub: float | None = None
    timer_clean: float | None = None
    expirations: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.reset_tree(self.parent, self.children)

    def reset_tree(self, parent, children) -> None:
        self.parent = parent
        self.children = tuple(children)
        self.directions = [{} for _ in range(self.n_channels)]

    def tree_neighbors(self) -> list[int]:
        return ([self.parent] if self.parent is not None else []) + list(self.children)

    def _check_channel(self, c: int) -> None:
        if not 0 <= c < self.n_channels:
            raise ProtocolError(f"unknown channel {c}")

    def subscribe(self, c: int, now: float) -> None:
        self._check_channel(c)
        if c not in self.subscribed:
            self.subscribed.add(c)
            self.timer_sub = now

    def unsubscribe(self, c: int, now: float) -> None:
        self.subscribed.discard(c)

    def on_timer_sub(self, now: float) -> SubMsg | None:
        if not self.subscribed:
            self.timer_sub = None
            return None
        self.timer_sub = now + self.timings.delta_s
        return SubMsg(None, frozenset(self.subscribed), ())

    def on_sub(self, msg: SubMsg, frm: int, now: float) -> SubMsg | None:
        if msg.r == self.id:
            return None
        for c in msg.channels:
            if 0 <= c < self.n_channels:
                self.directions[c][frm] = now
        rest = msg.channels - self.subscribed
        if rest and self.children:
            return SubMsg(frm, frozenset(rest), ())
        return None

    def on_timer_clean(self, now: float) -> None:
        self.timer_clean = now + self.timings.t_clean
        for row in self.directions:
            for w in [w for w, ts in row.items() if now - ts > self.timings.t_wb]:
                del row[w]
                self.expirations += 1

    def _forward(self, c, data, meta, exclude) -> list[tuple[int, TreePubMsg]]:
        nxt = PubMeta(meta.origin, meta.seq, meta.hops + 1)
        return [(w, TreePubMsg(c, data, nxt)) for w in self.tree_neighbors()
                if w != exclude and w in self.directions[c]]

    def publish(self, c: int, data: bytes, meta: PubMeta) -> list[tuple[int, TreePubMsg]]:
        self._check_channel(c)
        return self._forward(c, data, meta, None)

    def on_pub(self, msg: TreePubMsg, frm: int) -> tuple[bool, list[tuple[int, TreePubMsg]]]:
        delivered = msg.channel in self.subscribed
        return delivered, self._forward(msg.channel, msg.data, msg.meta, frm)



@dataclass(frozen=True)
class ShenEvent:
    """One input to :func:`shen_step`.

    ``kind`` is one of subscribe, unsubscribe, timer_sub, timer_clean, sub,
    publish, pub. ``msg`` and ``frm`` are used by sub and pub; ``channel``,
    ``data`` and ``meta`` by subscribe, unsubscribe and publish.
    """

    kind: str
    now: float = 0.0
    channel: int = 0
    msg: SubMsg | TreePubMsg | None = None
    frm: int | None = None
    data: bytes = b""
    meta: PubMeta | None = None


@dataclass
class ShenEmissions:
    delivered: bool = False
    broadcast: SubMsg | None = None  # goes to every tree neighbour
    unicasts: list[tuple[int, TreePubMsg]] = field(default_factory=list)


def shen_step(node: ShenNode, event: ShenEvent) -> ShenEmissions:
    """Apply one event to ``node`` and collect what it sends."""
    out = ShenEmissions()
    k = event.kind
    if k == "subscribe":
        node.subscribe(event.channel, event.now)
    elif k == "unsubscribe":
        node.unsubscribe(event.channel, event.now)
    elif k == "timer_sub":
        out.broadcast = node.on_timer_sub(event.now)
    elif k == "timer_clean":
        node.on_timer_clean(event.now)
    elif k == "sub":
        out.broadcast = node.on_sub(event.msg, event.frm, event.now)
    elif k == "publish":
        meta = event.meta or PubMeta(node.id, 0, 0)
        out.unicasts = node.publish(event.channel, event.data, meta)
    elif k == "pub":
        out.delivered, out.unicasts = node.on_pub(event.msg, event.frm)
    else:
        raise ProtocolError(f"unknown event kind {k!r}")
    return out

def shen_directions(tree: SpanningTree, subscribers) -> dict[int, set[int]]:
    """Converged direction sets: ``w`` is in ``d[v]`` iff a subscriber lies behind ``w``."""
    subs = set(subscribers)
    below: dict[int, int] = {}
    order = [tree.root]
    for v in order:
        order.extend(tree.children[v])
    for v in reversed(order):
        below[v] = (v in subs) + sum(below[c] for c in tree.children[v])
    total = below[tree.root]
    d: dict[int, set[int]] = {v: set() for v in order}
    for v in order:
        for c in tree.children[v]:
            if below[c]:
                d[v].add(c)
            if total - below[c]:
                d[c].add(v)
    return d


def route_shen(tree: SpanningTree, publisher: int, subscribers,
               directions: dict[int, set[int]] | None = None) -> RouteResult:
    """Flood along subscriber directions of the shared tree, never back."""
    subs = set(subscribers) - {publisher}
    d = directions if directions is not None else shen_directions(tree, subscribers)
    tx, hops = [], {}
    stack = [(publisher, None, 0)]
    while stack:
        v, frm, h = stack.pop()
        if v in subs:
            hops.setdefault(v, h)
        for w in sorted(d[v]):
            if w != frm:
                tx.append((v, w))
                stack.append((w, v, h + 1))
    return RouteResult(tx, hops)
