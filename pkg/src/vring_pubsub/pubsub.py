"""Node state machine for publish/subscribe routing on a virtual ring.

Subscriptions travel over the spanning tree and fill a next-subscriber table
per channel and own position. Publications travel ccw over the ring and its
shortcuts, each copy confined to a segment ``[goal, ep)`` so that concurrent
copies never overlap. Subscriptions are leased: entries that are not renewed
go stale and are replaced through a temporary value written back later.

A ``NodeState`` never reads a clock. Every handler receives ``now`` and
returns the messages to emit; timers are plain deadlines that the engine
watches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

from .ring import VirtualRing, is_between

log = logging.getLogger(__name__)

ForwardRule = Literal["segment", "literal"]


class ProtocolError(ValueError):
    """Rejected application request (unknown channel, node off-ring)."""


@dataclass(slots=True)
class RoutingEntry:
    ns: int | None = None
    ts: float | None = None
    nstmp: int | None = None


@dataclass(frozen=True, slots=True)
class SubMsg:
    r: int | None
    channels: frozenset[int]
    positions: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class PubMeta:
    """Bookkeeping for the checker; never consulted by routing."""

    origin: int
    seq: int
    hops: int = 0


@dataclass(frozen=True, slots=True)
class PubMsg:
    goal: int
    ep: int
    channel: int
    data: bytes
    meta: PubMeta


@dataclass
class Timings:
    """Leasing constants in simulation ticks."""

    delta_s: float
    t_clean: float
    t_wb: float

    @classmethod
    def for_ring(cls, l: int, hop_delay: float = 1.0, delta_s: float | None = None,
                 t_clean: float | None = None, t_wb: float | None = None) -> "Timings":
        d = float(delta_s) if delta_s is not None else 4.0 * l * hop_delay
        return cls(d, float(t_clean) if t_clean is not None else d / 4,
                   float(t_wb) if t_wb is not None else 2 * d)


@dataclass
class NodeState:
    id: int
    ring: VirtualRing
    n_channels: int
    timings: Timings
    parent: int | None = None
    children: tuple[int, ...] = ()
    forward_rule: ForwardRule = "segment"
    subscribed: set[int] = field(default_factory=set)
    table: list[list[RoutingEntry]] = field(default_factory=list)
    timer_sub: float | None = None
    timer_clean: float | None = None
    writebacks: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.reset_ring(self.ring, self.parent, self.children)

    # -- structure -------------------------------------------------------

    @property
    def positions(self) -> tuple[int, ...]:
        return self.ring.pos.get(self.id, ())

    @property
    def l(self) -> int:  # noqa: E743
        return self.ring.l

    def reset_ring(self, ring: VirtualRing, parent: int | None,
                   children: tuple[int, ...]) -> None:
        """Attach to a (re)built ring; routing tables restart empty."""
        self.ring = ring
        self.parent = parent
        self.children = tuple(children)
        self.table = [[RoutingEntry() for _ in self.positions] for _ in range(self.n_channels)]

    def tree_neighbors(self) -> list[int]:
        return ([self.parent] if self.parent is not None else []) + list(self.children)

    def _check_channel(self, c: int) -> None:
        if not 0 <= c < self.n_channels:
            raise ProtocolError(f"unknown channel {c}")

    # -- subscribing -----------------------------------------------------

    def subscribe(self, c: int, now: float) -> None:
        self._check_channel(c)
        if c not in self.subscribed:
            self.subscribed.add(c)
            self.timer_sub = now

    def unsubscribe(self, c: int, now: float) -> None:
        # no explicit message: the node just stops renewing once C_S is empty
        self.subscribed.discard(c)

    def on_timer_sub(self, now: float) -> SubMsg | None:
        if not self.subscribed:
            self.timer_sub = None
            return None
        self.timer_sub = now + self.timings.delta_s
        return SubMsg(None, frozenset(self.subscribed), self.positions)

    def on_sub(self, msg: SubMsg, frm: int, now: float) -> SubMsg | None:
        """Update tables from a subscription; maybe relay it down the tree."""
        if msg.r == self.id:
            return None
        if not msg.channels or not msg.positions or any(
                not 0 <= p < self.l for p in msg.positions):
            self.diagnostics.append(f"t={now}: malformed SUB from {frm}")
            return None
        for c in sorted(msg.channels):
            if 0 <= c < self.n_channels:
                self.upd_sn(c, msg.positions, now)
        rest = msg.channels - self.subscribed
        if rest and self.children:
            return SubMsg(frm, frozenset(rest), msg.positions)
        return None

    def upd_sn(self, c: int, sp_list, now: float) -> None:
        own = self.positions
        row = self.table[c]
        stale_after = self.timings.delta_s
        l = self.l
        for sp in sp_list:
            if sp in own:
                continue
            for j, p in enumerate(own):
                e = row[j]
                if e.ns is None or is_between(sp, p, e.ns, l):
                    e.ns = sp
                    e.ts = now
                    e.nstmp = None
                elif now - e.ts > stale_after:
                    if e.nstmp is None or is_between(sp, p, e.nstmp, l):
                        e.nstmp = sp

    def on_timer_clean(self, now: float) -> None:
        self.timer_clean = now + self.timings.t_clean
        t_wb = self.timings.t_wb
        for row in self.table:
            for e in row:
                if e.nstmp is not None and e.ts is not None and now - e.ts > t_wb:
                    e.ns = e.nstmp
                    e.ts = now
                    e.nstmp = None
                    self.writebacks += 1

    # -- publications ----------------------------------------------------

    def publish(self, c: int, data: bytes, meta: PubMeta) -> list[tuple[int, PubMsg]]:
        self._check_channel(c)
        if not self.positions:
            raise ProtocolError(f"node {self.id} is not on the ring")
        start = self.positions[0]
        return self.handle_pub(start, start, c, data, meta)

    def on_pub(self, msg: PubMsg) -> tuple[bool, list[tuple[int, PubMsg]]]:
        """Deliver if subscribed, then forward. Returns ``(delivered, sends)``."""
        if msg.goal not in self.positions:
            self.diagnostics.append(f"PUB for position {msg.goal} not owned by {self.id}")
            return False, []
        delivered = msg.channel in self.subscribed
        return delivered, self.handle_pub(msg.goal, msg.ep, msg.channel, msg.data, msg.meta)

    def calc_new_ep(self, p: int, max_ep: int) -> int:
        own = self.positions
        q = own[(own.index(p) + 1) % len(own)]
        return q if is_between(q, p, max_ep, self.l) else max_ep

    def handled_positions(self, cur: int, ep: int) -> list[int]:
        """Own positions inside ``[cur, ep)``, in ccw order from ``cur``."""
        own = self.positions
        if self.forward_rule == "literal":
            return list(own)
        i = own.index(cur)
        out = [cur]
        for k in range(1, len(own)):
            p = own[(i + k) % len(own)]
            if p == ep or not is_between(p, cur, ep, self.l):
                break
            out.append(p)
        return out

    def handle_pub(self, cur: int, ep: int, c: int, data: bytes,
                   meta: PubMeta) -> list[tuple[int, PubMsg]]:
        """Emit one copy per own branch that still holds a subscriber.

        Returns ``(source position, message)`` pairs.
        """
        l = self.l
        own = self.positions
        row = self.table[c]
        out = []
        hop_meta = PubMeta(meta.origin, meta.seq, meta.hops + 1)
        literal = self.forward_rule == "literal"
        for p in self.handled_positions(cur, ep):
            ns = row[own.index(p)].ns
            if ns is None:
                continue
            new_ep = self.calc_new_ep(p, ep)
            if literal:
                go = is_between(ns, cur, new_ep, l)
            else:
                go = ns != new_ep and is_between(ns, p, new_ep, l)
            if go:
                goal = self.ring.get_pos_closest_to(p, ns)
                out.append((p, PubMsg(goal, new_ep, c, data, hop_meta)))
        return out

    # -- inspection ------------------------------------------------------

    def ns_row(self, c: int) -> list[int | None]:
        return [e.ns for e in self.table[c]]


def converged_table(ring: VirtualRing, subscribers) -> dict[int, list[int | None]]:
    """Next-subscriber entries that error-free leasing converges to.

    ``subscribers`` is a set of node ids. Maps node id to its per-position row.
    """
    from . import kernels

    arr = ring.arrays
    is_sub = [0] * arr.node_count
    for v in subscribers:
        if v < arr.node_count:
            is_sub[v] = 1
    ns = kernels.next_subscriber_table(arr.owner, is_sub)
    return {v: [None if ns[p] < 0 else int(ns[p]) for p in ps] for v, ps in ring.pos.items()}


@dataclass
class RouteResult:
    """Outcome of routing one publication on a static structure."""

    transmissions: list[tuple[int, int]]
    hops: dict[int, int]
    paths: list[tuple[int, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.transmissions)

    @property
    def delivered(self) -> set[int]:
        return set(self.hops)


def route_static(ring: VirtualRing, publisher: int, subscribers,
                 table: dict[int, list[int | None]] | None = None) -> RouteResult:
    """Route one publication with the compiled kernel over fixed tables.

    ``table`` defaults to the converged tables for ``subscribers``. Paths are
    reported as ``(source position, goal position)`` pairs.
    """
    from . import kernels

    arr = ring.arrays
    if table is None:
        table = converged_table(ring, subscribers)
    ns = [-1] * ring.l
    for v, row in table.items():
        for p, q in zip(ring.pos[v], row):
            ns[p] = -1 if q is None else q
    src, dst, hops = kernels.route_publication(
        arr.owner, arr.pos_start, arr.pos_list, arr.pos_index, arr.sc_start, arr.sc_list,
        ns, publisher)
    subs = set(subscribers)
    owner = ring.owner
    tx, delivered = [], {}
    for s, d, h in zip(src.tolist(), dst.tolist(), hops.tolist()):
        tx.append((owner[s], owner[d]))
        if owner[d] in subs and owner[d] != publisher:
            delivered.setdefault(owner[d], h)
    return RouteResult(tx, delivered, list(zip(src.tolist(), dst.tolist())))
