"""Communication graphs, degree-capped link selection and BFS spanning trees."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

ER_MAX_RETRIES = 1000


class TopologyError(ValueError):
    """Malformed graph input."""


class GenerationError(RuntimeError):
    """No connected sample within the retry budget."""


class SelectionError(RuntimeError):
    """No connected degree-capped link subset could be found."""


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over an explicit node set.

    Node ids are plain ints. Generators and the file loader produce the
    contiguous set ``0..n-1``; churn may leave gaps.
    """

    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise TopologyError(f"self-loop on node {u}")
            if u > v:
                raise TopologyError(f"edge ({u}, {v}) is not normalised")
            if u not in self.nodes or v not in self.nodes:
                raise TopologyError(f"edge ({u}, {v}) references an unknown node")

    @classmethod
    def from_edges(cls, n: int | Iterable[int], edges: Iterable[tuple[int, int]]) -> "Graph":
        nodes = frozenset(range(n)) if isinstance(n, int) else frozenset(n)
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            e = _edge(int(u), int(v))
            if e in seen:
                raise TopologyError(f"duplicate edge {e}")
            seen.add(e)
        return cls(nodes, frozenset(seen))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: tuple(sorted(nb)) for v, nb in adj.items()}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(nb) for nb in self.adjacency.values()), default=0)

    def is_connected(self) -> bool:
        return _connected(self.nodes, self.adjacency)

    def without_node(self, v: int) -> "Graph":
        return Graph(self.nodes - {v}, frozenset(e for e in self.edges if v not in e))

    def with_node(self, v: int, neighbors: Iterable[int]) -> "Graph":
        if v in self.nodes:
            raise TopologyError(f"node {v} already exists")
        new = {_edge(v, w) for w in neighbors}
        return Graph(self.nodes | {v}, self.edges | frozenset(new))


def _connected(nodes, adj) -> bool:
    if not nodes:
        return False
    start = min(nodes)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)


@dataclass(frozen=True)
class LinkSelection:
    """The subset of links the upper layers are allowed to see."""

    base: Graph
    kept_edges: frozenset[tuple[int, int]]
    degree_cap: int | None

    @cached_property
    def graph(self) -> Graph:
        return Graph(self.base.nodes, self.kept_edges)


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: dict[int, int | None]
    children: dict[int, tuple[int, ...]] = field(repr=False)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.parent)

    def edges(self) -> set[tuple[int, int]]:
        return {_edge(v, p) for v, p in self.parent.items() if p is not None}

    def neighbors(self, v: int) -> list[int]:
        p = self.parent[v]
        return ([p] if p is not None else []) + list(self.children[v])

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (self.parent[v] is not None)

    def depth(self) -> dict[int, int]:
        out = {self.root: 0}
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for c in self.children[u]:
                out[c] = out[u] + 1
                queue.append(c)
        return out

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path


def generate_er(n: int, p: float, seed: int | None = None) -> Graph:
    """Sample a connected G(n, p), resampling up to ``ER_MAX_RETRIES`` times."""
    if n < 2:
        raise TopologyError("need at least 2 nodes")
    if not 0 < p <= 1:
        raise TopologyError("edge probability must be in (0, 1]")
    rng = random.Random(seed)
    nodes = frozenset(range(n))
    for _ in range(ER_MAX_RETRIES):
        edges = frozenset(
            (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
        )
        g = Graph(nodes, edges)
        if g.is_connected():
            return g
    raise GenerationError(f"no connected G({n}, {p}) after {ER_MAX_RETRIES} samples")


def select_links(g: Graph, degree_cap: int | None, seed: int | None = None) -> LinkSelection:
    """Greedily prune links until every node has at most ``degree_cap`` of them.

    Stand-in for a topology control algorithm. Edges are removed from the
    highest-degree node first, preferring the partner with the highest
    degree, and never when removal would disconnect the graph.
    """
    if degree_cap is None:
        return LinkSelection(g, g.edges, None)
    if degree_cap < 2:
        raise TopologyError("degree cap must be at least 2")
    rng = random.Random(seed)
    adj = {v: set(nb) for v, nb in g.adjacency.items()}
    # seeded tie-break rank per edge
    order = sorted(g.edges)
    rng.shuffle(order)
    rank = {e: i for i, e in enumerate(order)}

    while True:
        over = sorted((v for v in adj if len(adj[v]) > degree_cap), key=lambda v: (-len(adj[v]), v))
        if not over:
            break
        for v in over:
            cands = sorted(adj[v], key=lambda w: (-len(adj[w]), rank[_edge(v, w)]))
            for w in cands:
                adj[v].discard(w)
                adj[w].discard(v)
                if _connected(g.nodes, adj):
                    break
                adj[v].add(w)
                adj[w].add(v)
            else:
                continue
            break
        else:
            raise SelectionError(f"cannot cap degree at {degree_cap} while staying connected")

    kept = frozenset(_edge(u, v) for u in adj for v in adj[u] if u < v)
    return LinkSelection(g, kept, degree_cap)


def build_tree(sel: LinkSelection | Graph, root: int) -> SpanningTree:
    """BFS spanning tree over the kept links, children sorted by id."""
    g = sel.graph if isinstance(sel, LinkSelection) else sel
    if root not in g.nodes:
        raise TopologyError(f"root {root} is not a node")
    adj = g.adjacency
    parent: dict[int, int | None] = {root: None}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if len(parent) != g.node_count:
        raise TopologyError("kept links are not connected")
    children: dict[int, list[int]] = {v: [] for v in parent}
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    return SpanningTree(root, parent, {v: tuple(sorted(c)) for v, c in children.items()})


def bfs_distances(g: Graph, source: int) -> dict[int, int]:
    adj = g.adjacency
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def central_node(g: Graph) -> int:
    """Node of minimum eccentricity, smallest id on ties."""
    best = None
    for v in sorted(g.nodes):
        ecc = max(bfs_distances(g, v).values())
        if best is None or ecc < best[0]:
            best = (ecc, v)
    return best[1]


def load_graph(path: str | Path) -> Graph:
    """Read the ``n m`` + ``u v`` edge-list format."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise TopologyError("first line must be 'n m'")
    n, m = (int(x) for x in lines[0])
    if len(lines) - 1 != m:
        raise TopologyError(f"header announces {m} edges, file has {len(lines) - 1}")
    edges = []
    for i, parts in enumerate(lines[1:], start=2):
        if len(parts) != 2:
            raise TopologyError(f"line {i}: expected 'u v'")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise TopologyError(f"line {i}: node id out of range")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def format_graph(g: Graph) -> str:
    if g.nodes != frozenset(range(g.node_count)):
        raise TopologyError("file format needs contiguous ids 0..n-1")
    lines = [f"{g.node_count} {len(g.edges)}"] + [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g))
