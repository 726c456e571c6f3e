"""Virtual ring built from a DFS of the spanning tree, plus shortcuts.

Positions are indices ``0..l-1`` on the ring; "ccw" is the forwarding
direction, i.e. increasing index modulo ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .topology import LinkSelection, SpanningTree

ShortcutMode = Literal["all-pairs", "paired"]


def ccw_dist(frm: int, to: int, l: int) -> int:
    return (to - frm) % l


def is_between(test: int, left: int, right: int, l: int) -> bool:
    """True iff ``test`` lies in the ccw segment ``(left, right]``.

    ``left == right`` denotes the full ring and is always true.
    """
    if left == right:
        return True
    d = (test - left) % l
    return 0 < d <= (right - left) % l


@dataclass(frozen=True)
class VirtualRing:
    seq: tuple[int, ...]
    pos: dict[int, tuple[int, ...]]
    shortcuts: dict[int, frozenset[int]]

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.seq)

    @cached_property
    def owner(self) -> tuple[int, ...]:
        return self.seq

    @cached_property
    def index_in_owner(self) -> tuple[int, ...]:
        idx = [0] * self.l
        for positions in self.pos.values():
            for j, p in enumerate(positions):
                idx[p] = j
        return tuple(idx)

    def successor(self, p: int) -> int:
        return (p + 1) % self.l

    def neighbors(self, p: int) -> list[int]:
        """One-hop reachable positions from ``p`` in ccw preference order."""
        return [self.successor(p)] + sorted(self.shortcuts.get(p, ()))

    def get_pos_closest_to(self, p: int, goal: int) -> int:
        """Farthest one-hop candidate from ``p`` that does not pass ``goal``."""
        limit = ccw_dist(p, goal, self.l)
        best, best_d = self.successor(p), 1
        for q in self.shortcuts.get(p, ()):
            d = ccw_dist(p, q, self.l)
            if best_d < d <= limit:
                best, best_d = q, d
        return best

    @cached_property
    def arrays(self) -> "RingArrays":
        return RingArrays.from_ring(self)

    def dump(self) -> str:
        lines = [str(self.l), " ".join(map(str, self.seq))]
        for v in sorted(self.pos):
            lines.append(f"pos {v}: " + " ".join(map(str, self.pos[v])))
        for p in sorted(self.shortcuts):
            if self.shortcuts[p]:
                lines.append(f"sc {p}: " + " ".join(map(str, sorted(self.shortcuts[p]))))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "VirtualRing":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        l = int(lines[0])
        seq = tuple(int(x) for x in lines[1].split())
        if len(seq) != l:
            raise ValueError(f"ring length {l} does not match sequence of {len(seq)}")
        pos: dict[int, tuple[int, ...]] = {}
        shortcuts: dict[int, frozenset[int]] = {}
        for ln in lines[2:]:
            head, _, body = ln.partition(":")
            kind, key = head.split()
            vals = tuple(int(x) for x in body.split())
            if kind == "pos":
                pos[int(key)] = vals
            elif kind == "sc":
                shortcuts[int(key)] = frozenset(vals)
            else:
                raise ValueError(f"unknown dump line {ln!r}")
        return cls(seq, pos, shortcuts)


@dataclass(frozen=True)
class RingArrays:
    """Flat int32 views of a ring for the kernels."""

    owner: np.ndarray
    pos_start: np.ndarray
    pos_list: np.ndarray
    pos_index: np.ndarray
    sc_start: np.ndarray
    sc_list: np.ndarray
    node_count: int

    @classmethod
    def from_ring(cls, ring: VirtualRing) -> "RingArrays":
        nmax = max(ring.pos) + 1
        pos_start = np.zeros(nmax + 1, dtype=np.int32)
        for v, ps in ring.pos.items():
            pos_start[v + 1] = len(ps)
        pos_start = np.cumsum(pos_start, dtype=np.int32)
        pos_list = np.zeros(ring.l, dtype=np.int32)
        for v, ps in ring.pos.items():
            pos_list[pos_start[v]:pos_start[v] + len(ps)] = ps
        sc = [sorted(ring.shortcuts.get(p, ())) for p in range(ring.l)]
        sc_start = np.zeros(ring.l + 1, dtype=np.int32)
        sc_start[1:] = np.cumsum([len(s) for s in sc])
        sc_list = np.array([q for s in sc for q in s], dtype=np.int32)
        return cls(
            owner=np.asarray(ring.seq, dtype=np.int32),
            pos_start=pos_start,
            pos_list=pos_list,
            pos_index=np.asarray(ring.index_in_owner, dtype=np.int32),
            sc_start=sc_start,
            sc_list=sc_list,
            node_count=nmax,
        )


def build_ring(tree: SpanningTree, sel: LinkSelection | None = None,
               shortcut_mode: ShortcutMode = "all-pairs") -> VirtualRing:
    """DFS the tree from its root, recording every visit as a position.

    Each kept link outside the tree becomes shortcuts between the positions
    of its endpoints. ``all-pairs`` links every position of one endpoint to
    every position of the other; ``paired`` zips the two sorted lists.
    """
    seq: list[int] = []
    stack = [(tree.root, iter(tree.children[tree.root]))]
    seq.append(tree.root)
    while stack:
        v, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                seq.append(stack[-1][0])
            continue
        seq.append(child)
        stack.append((child, iter(tree.children[child])))
    # the final return to the root closes the ring
    if len(seq) > 1:
        seq.pop()

    l = len(seq)
    pos: dict[int, list[int]] = {}
    for i, v in enumerate(seq):
        pos.setdefault(v, []).append(i)

    shortcuts: dict[int, set[int]] = {}
    if sel is not None:
        tree_edges = tree.edges()
        for u, v in sorted(sel.kept_edges - tree_edges):
            if shortcut_mode == "all-pairs":
                pairs = [(p, q) for p in pos[u] for q in pos[v]]
            elif shortcut_mode == "paired":
                pairs = list(zip(pos[u], pos[v]))
            else:
                raise ValueError(f"unknown shortcut mode {shortcut_mode!r}")
            for p, q in pairs:
                if q != (p + 1) % l:
                    shortcuts.setdefault(p, set()).add(q)
                if p != (q + 1) % l:
                    shortcuts.setdefault(q, set()).add(p)

    return VirtualRing(
        tuple(seq),
        {v: tuple(ps) for v, ps in pos.items()},
        {p: frozenset(qs) for p, qs in shortcuts.items()},
    )
