"""Deterministic discrete-event engine for the ring protocol and Shen baseline.

Messages take ``hop_delay`` ticks per hop and are lost independently with the
current loss probability. Timers, application commands, loss changes and
faults are events in one heap ordered by ``(time, seq)``, so a scenario and
seed fully determine the run.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import json
import logging
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

from .baselines import ShenNode, TreePubMsg
from .pubsub import NodeState, PubMeta, PubMsg, RoutingEntry, SubMsg, Timings
from .ring import VirtualRing, build_ring, is_between
from .topology import (Graph, LinkSelection, SpanningTree, build_tree, central_node,
                       generate_er, load_graph, select_links)
from .wire import pub_size, sub_size

log = logging.getLogger(__name__)

Protocol = Literal["vring", "shen"]


class ScenarioError(ValueError):
    """Scenario validation failed; ``errors`` lists ``field.path: message``."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


class SimulationError(RuntimeError):
    """A fault left the scenario in an unrecoverable state."""


@dataclass
class SubAction:
    time: float
    node: int
    channel: int = 0
    action: Literal["subscribe", "unsubscribe"] = "subscribe"


@dataclass
class Publication:
    time: float
    node: int
    channel: int = 0
    size: int = 8


@dataclass
class Fault:
    """``corrupt`` overwrites one table entry; ``leave``/``join`` edit the topology."""

    time: float
    kind: Literal["corrupt", "leave", "join"]
    node: int
    channel: int = 0
    index: int = 0
    ns: int | None = None
    neighbors: list[int] = field(default_factory=list)


@dataclass
class LossChange:
    time: float
    loss: float


@dataclass
class Scenario:
    nodes: int | None = None
    edge_prob: float | None = None
    graph_file: str | None = None
    edges: list[tuple[int, int]] | None = None
    degree_cap: int | None = None
    root: int | None = None
    channels: int = 1
    subscriptions: list[SubAction] = field(default_factory=list)
    publications: list[Publication] = field(default_factory=list)
    loss: float = 0.0
    loss_schedule: list[LossChange] = field(default_factory=list)
    hop_delay: float = 1.0
    delta_s: float | None = None
    t_clean: float | None = None
    t_wb: float | None = None
    duration: float = 1000.0
    seed: int = 0
    faults: list[Fault] = field(default_factory=list)
    rebuild_latency: float = 0.0
    protocol: Protocol = "vring"
    shortcut_mode: str = "all-pairs"
    forward_rule: str = "segment"
    audit: bool = False
    trace: bool = False

    _LISTS = {"subscriptions": SubAction, "publications": Publication,
              "faults": Fault, "loss_schedule": LossChange}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Scenario":
        errors = []
        known = {f for f in cls.__dataclass_fields__}
        for k in d:
            if k not in known:
                errors.append(f"{k}: unknown field")
        kw = {k: v for k, v in d.items() if k in known}
        for name, typ in cls._LISTS.items():
            items = []
            for i, item in enumerate(kw.get(name, []) or []):
                try:
                    items.append(typ(**item))
                except TypeError as exc:
                    errors.append(f"{name}[{i}]: {exc}")
            kw[name] = items
        if kw.get("edges") is not None:
            kw["edges"] = [tuple(e) for e in kw["edges"]]
        if errors:
            raise ScenarioError(errors)
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def base_graph(self) -> Graph:
        sources = [self.graph_file is not None, self.edges is not None, self.edge_prob is not None]
        if sum(sources) != 1:
            raise ScenarioError(["topology: give exactly one of graph_file, edges, edge_prob"])
        if self.graph_file is not None:
            return load_graph(self.graph_file)
        if self.edges is not None:
            if self.nodes is None:
                raise ScenarioError(["nodes: required with inline edges"])
            return Graph.from_edges(self.nodes, self.edges)
        if self.nodes is None:
            raise ScenarioError(["nodes: required with edge_prob"])
        return generate_er(self.nodes, self.edge_prob, self.seed)

    def validate(self, g: Graph) -> list[str]:
        errors = []
        ids = g.nodes | {f.node for f in self.faults if f.kind == "join"}
        if self.channels < 1 or self.channels > 255:
            errors.append("channels: must be in 1..255")
        if not 0 <= self.loss <= 1:
            errors.append("loss: must be in [0, 1]")
        if self.hop_delay <= 0:
            errors.append("hop_delay: must be positive")
        if self.degree_cap is not None and self.degree_cap < 2:
            errors.append("degree_cap: must be at least 2")
        if self.root is not None and self.root not in g.nodes:
            errors.append(f"root: unknown node {self.root}")
        if self.protocol not in ("vring", "shen"):
            errors.append(f"protocol: unknown protocol {self.protocol!r}")
        if self.forward_rule not in ("segment", "literal"):
            errors.append(f"forward_rule: unknown rule {self.forward_rule!r}")
        if self.shortcut_mode not in ("all-pairs", "paired"):
            errors.append(f"shortcut_mode: unknown mode {self.shortcut_mode!r}")
        for i, s in enumerate(self.subscriptions):
            if s.node not in ids:
                errors.append(f"subscriptions[{i}].node: unknown node {s.node}")
            if not 0 <= s.channel < self.channels:
                errors.append(f"subscriptions[{i}].channel: unknown channel {s.channel}")
            if s.action not in ("subscribe", "unsubscribe"):
                errors.append(f"subscriptions[{i}].action: unknown action {s.action!r}")
        for i, p in enumerate(self.publications):
            if p.node not in ids:
                errors.append(f"publications[{i}].node: unknown node {p.node}")
            if not 0 <= p.channel < self.channels:
                errors.append(f"publications[{i}].channel: unknown channel {p.channel}")
            if not 0 <= p.size < 65536:
                errors.append(f"publications[{i}].size: must fit in 16 bits")
        for i, f in enumerate(self.faults):
            if f.kind not in ("corrupt", "leave", "join"):
                errors.append(f"faults[{i}].kind: unknown kind {f.kind!r}")
            elif f.kind == "join":
                if f.node in g.nodes:
                    errors.append(f"faults[{i}].node: node {f.node} already exists")
                if not f.neighbors:
                    errors.append(f"faults[{i}].neighbors: a joining node needs neighbours")
            elif f.node not in ids:
                errors.append(f"faults[{i}].node: unknown node {f.node}")
        for i, c in enumerate(self.loss_schedule):
            if not 0 <= c.loss <= 1:
                errors.append(f"loss_schedule[{i}].loss: must be in [0, 1]")
        return errors


@dataclass
class PubRecord:
    pub_id: int
    origin: int
    channel: int
    seq: int
    time: float
    expected: frozenset[int]
    routed: bool = True
    deliveries: Counter = field(default_factory=Counter)
    hops: dict[int, list[int]] = field(default_factory=dict)
    tx: int = 0
    lost: int = 0
    bytes: int = 0

    @property
    def delivered(self) -> set[int]:
        return set(self.deliveries)

    @property
    def dup_count(self) -> int:
        return sum(c - 1 for c in self.deliveries.values() if c > 1)

    @property
    def max_hops(self) -> int:
        return max((h for hs in self.hops.values() for h in hs), default=0)

    def exactly_once(self) -> bool:
        return (set(self.deliveries) == self.expected
                and all(c == 1 for c in self.deliveries.values()))


@dataclass
class TraceLedger:
    """Append-only record of one run."""

    publications: list[PubRecord] = field(default_factory=list)
    faults: list[tuple[float, dict]] = field(default_factory=list)
    writebacks: list[tuple[float, int]] = field(default_factory=list)
    violations: list[tuple[float, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    sub_tx: int = 0
    sub_lost: int = 0
    sub_bytes: int = 0
    pub_tx: int = 0
    pub_lost: int = 0
    pub_bytes: int = 0
    stale_dropped: int = 0
    ring_length: int = 0
    delta_s: float = 0.0
    t_wb: float = 0.0
    hop_delay: float = 1.0
    node_count: int = 0

    def record(self, **event) -> None:
        self.events.append(event)

    def summary_rows(self) -> list[dict]:
        return [{"pub_id": r.pub_id, "channel": r.channel, "tx_count": r.tx,
                 "delivered": len(r.deliveries), "dup_count": r.dup_count,
                 "max_hops": r.max_hops} for r in self.publications]

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["pub_id", "channel", "tx_count", "delivered", "dup_count",
                                 "max_hops"], lineterminator="\n")
        w.writeheader()
        w.writerows(self.summary_rows())
        return buf.getvalue()

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "meta", "ring_length": self.ring_length,
                             "delta_s": self.delta_s, "t_wb": self.t_wb,
                             "hop_delay": self.hop_delay, "nodes": self.node_count},
                            sort_keys=True)]
        lines += [json.dumps(e, sort_keys=True) for e in self.events]
        for r in self.publications:
            lines.append(json.dumps({
                "type": "publication", "pub_id": r.pub_id, "origin": r.origin,
                "channel": r.channel, "seq": r.seq, "time": r.time,
                "expected": sorted(r.expected), "routed": r.routed,
                "deliveries": {str(k): v for k, v in sorted(r.deliveries.items())},
                "hops": {str(k): v for k, v in sorted(r.hops.items())},
                "tx": r.tx, "lost": r.lost, "bytes": r.bytes}, sort_keys=True))
        for t, f in self.faults:
            lines.append(json.dumps({"type": "fault", "time": t, **f}, sort_keys=True))
        for t, v in self.writebacks:
            lines.append(json.dumps({"type": "writeback", "time": t, "node": v}, sort_keys=True))
        for t, msg in self.violations:
            lines.append(json.dumps({"type": "violation", "time": t, "what": msg}, sort_keys=True))
        lines.append(json.dumps({"type": "totals", "sub_tx": self.sub_tx,
                                 "sub_lost": self.sub_lost, "sub_bytes": self.sub_bytes,
                                 "pub_tx": self.pub_tx, "pub_lost": self.pub_lost,
                                 "pub_bytes": self.pub_bytes,
                                 "stale_dropped": self.stale_dropped}, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "TraceLedger":
        led = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            kind = d.pop("type", None)
            if kind == "meta":
                led.ring_length = d["ring_length"]
                led.delta_s = d["delta_s"]
                led.t_wb = d["t_wb"]
                led.hop_delay = d["hop_delay"]
                led.node_count = d["nodes"]
            elif kind == "publication":
                r = PubRecord(d["pub_id"], d["origin"], d["channel"], d["seq"], d["time"],
                              frozenset(d["expected"]), d["routed"],
                              Counter({int(k): v for k, v in d["deliveries"].items()}),
                              {int(k): v for k, v in d["hops"].items()},
                              d["tx"], d["lost"], d["bytes"])
                led.publications.append(r)
            elif kind == "fault":
                t = d.pop("time")
                led.faults.append((t, d))
            elif kind == "writeback":
                led.writebacks.append((d["time"], d["node"]))
            elif kind == "violation":
                led.violations.append((d["time"], d["what"]))
            elif kind == "totals":
                for k, v in d.items():
                    setattr(led, k, v)
            else:
                led.events.append({"type": kind, **d} if kind else d)
        return led

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ledger.jsonl").write_text(self.to_jsonl())
        (out / "summary.csv").write_text(self.summary_csv())

    def exactly_once_violations(self, start: float = float("-inf"),
                                end: float = float("inf")) -> list[PubRecord]:
        return [r for r in self.publications
                if start <= r.time < end and r.routed and not r.exactly_once()]


@dataclass
class Structure:
    selection: LinkSelection
    tree: SpanningTree
    ring: VirtualRing


def build_structure(g: Graph, degree_cap: int | None, seed: int, root: int | None = None,
                    shortcut_mode: str = "all-pairs") -> Structure:
    sel = select_links(g, degree_cap, seed)
    if root is None or root not in g.nodes:
        root = central_node(sel.graph)
    tree = build_tree(sel, root)
    return Structure(sel, tree, build_ring(tree, sel, shortcut_mode))


class Simulator:
    """Single-threaded event loop over one scenario."""

    def __init__(self, sc: Scenario, graph: Graph | None = None):
        self.sc = sc
        self.base = graph if graph is not None else sc.base_graph()
        errors = sc.validate(self.base)
        if errors:
            raise ScenarioError(errors)
        self.ledger = TraceLedger(hop_delay=sc.hop_delay)
        self.now = 0.0
        self.epoch = 0
        self.loss = sc.loss
        self.rebuilding_until = float("-inf")
        self._loss_rng = random.Random(f"loss:{sc.seed}")
        self._heap: list = []
        self._seq = itertools.count()
        self._armed: dict[tuple[int, str], tuple[int, float | None]] = {}
        self._tokens = itertools.count()
        self._pub_seq: Counter = Counter()
        self._records: dict[tuple[int, int], PubRecord] = {}

        self.structure = build_structure(self.base, sc.degree_cap, sc.seed, sc.root,
                                         sc.shortcut_mode)
        ring = self.structure.ring
        self.timings = Timings.for_ring(ring.l, sc.hop_delay, sc.delta_s, sc.t_clean, sc.t_wb)
        self.ledger.ring_length = ring.l
        self.ledger.delta_s = self.timings.delta_s
        self.ledger.t_wb = self.timings.t_wb
        self.ledger.node_count = self.base.node_count
        self.nodes: dict[int, NodeState | ShenNode] = {}
        for v in sorted(self.base.nodes):
            self._add_node(v)

        for s in sc.subscriptions:
            self._push(s.time, "app", ("sub", s))
        for p in sc.publications:
            self._push(p.time, "app", ("pub", p))
        for f in sc.faults:
            self._push(f.time, "fault", f)
        for c in sc.loss_schedule:
            self._push(c.time, "loss", c.loss)

    # -- setup -------------------------------------------------------------

    @property
    def ring(self) -> VirtualRing:
        return self.structure.ring

    @property
    def tree(self) -> SpanningTree:
        return self.structure.tree

    def _add_node(self, v: int) -> None:
        tree = self.structure.tree
        parent, children = tree.parent[v], tree.children[v]
        if self.sc.protocol == "vring":
            node = NodeState(v, self.ring, self.sc.channels, self.timings, parent, children,
                             self.sc.forward_rule)
        else:
            node = ShenNode(v, self.sc.channels, self.timings, parent, children)
        node.timer_clean = self.now + self.timings.t_clean
        self.nodes[v] = node
        self._sync_timers(v)

    def _push(self, t: float, kind: str, data) -> None:
        heapq.heappush(self._heap, (t, next(self._seq), kind, data))

    def _sync_timers(self, v: int) -> None:
        node = self.nodes.get(v)
        for which in ("sub", "clean"):
            deadline = None if node is None else getattr(node, f"timer_{which}")
            armed = self._armed.get((v, which))
            if armed is not None and armed[1] == deadline:
                continue
            token = next(self._tokens)
            self._armed[(v, which)] = (token, deadline)
            if deadline is not None:
                self._push(deadline, "timer", (v, which, token))

    # -- running -----------------------------------------------------------

    def run(self) -> TraceLedger:
        return self.run_until(self.sc.duration)

    def run_until(self, t_end: float) -> TraceLedger:
        """Process every event with time <= ``t_end`` (capped at the duration)."""
        t_end = min(t_end, self.sc.duration)
        heap = self._heap
        handlers = {"sub": self._on_sub_arrival, "pub": self._on_pub_arrival,
                    "timer": self._on_timer, "app": self._on_app, "fault": self._on_fault,
                    "loss": self._on_loss}
        while heap and heap[0][0] <= t_end:
            t, _, kind, data = heapq.heappop(heap)
            self.now = t
            handlers[kind](data)
        self.now = max(self.now, t_end)
        return self.ledger

    def _lost(self) -> bool:
        return self.loss > 0 and self._loss_rng.random() < self.loss

    def _rebuilding(self) -> bool:
        return self.now < self.rebuilding_until

    # -- subscriptions -----------------------------------------------------

    def _broadcast_sub(self, v: int, msg: SubMsg) -> None:
        size = sub_size(msg)
        for w in self.nodes[v].tree_neighbors():
            self.ledger.sub_tx += 1
            self.ledger.sub_bytes += size
            if self._lost():
                self.ledger.sub_lost += 1
                continue
            self._push(self.now + self.sc.hop_delay, "sub", (w, msg, v, self.epoch))

    def _on_sub_arrival(self, data) -> None:
        w, msg, frm, epoch = data
        if epoch != self.epoch or w not in self.nodes or self._rebuilding():
            self.ledger.stale_dropped += 1
            return
        node = self.nodes[w]
        if frm not in node.tree_neighbors():
            return
        before = node.writebacks if self.sc.protocol == "vring" else 0
        relay = node.on_sub(msg, frm, self.now)
        if relay is not None:
            self._broadcast_sub(w, relay)
        if self.sc.protocol == "vring" and node.writebacks != before:
            self._note_writebacks(w, node.writebacks - before)

    def _note_writebacks(self, v: int, k: int) -> None:
        for _ in range(k):
            self.ledger.writebacks.append((self.now, v))
        if self.sc.trace:
            self.ledger.record(type="writeback_event", time=self.now, node=v, count=k)

    # -- timers ------------------------------------------------------------

    def _on_timer(self, data) -> None:
        v, which, token = data
        armed = self._armed.get((v, which))
        if armed is None or armed[0] != token or v not in self.nodes:
            return
        node = self.nodes[v]
        self._armed[(v, which)] = (token, None)
        if which == "sub":
            msg = node.on_timer_sub(self.now)
            if msg is not None and not self._rebuilding():
                self._broadcast_sub(v, msg)
        else:
            before = getattr(node, "writebacks", 0)
            node.on_timer_clean(self.now)
            after = getattr(node, "writebacks", 0)
            if after != before:
                self._note_writebacks(v, after - before)
        self._sync_timers(v)

    # -- publications ------------------------------------------------------

    def _send_pubs(self, v: int, sends, rec: PubRecord) -> None:
        vring = self.sc.protocol == "vring"
        for target, msg in sends:
            if vring:
                src = target
                dst = self.ring.owner[msg.goal]
                # a confined copy advances ccw inside a segment shorter than l
                if msg.meta.hops > self.ring.l:
                    self.ledger.violations.append(
                        (self.now, f"ttl: publication {rec.pub_id} exceeded {self.ring.l} hops"))
                    continue
                if self.sc.audit:
                    self._audit(src, msg)
            else:
                dst = target
            size = pub_size(msg) if vring else 14 + len(msg.data)
            rec.tx += 1
            rec.bytes += size
            self.ledger.pub_tx += 1
            self.ledger.pub_bytes += size
            if self.sc.trace:
                self.ledger.record(type="tx", time=self.now, pub_id=rec.pub_id, src=v, dst=dst,
                                   **({"from_pos": src, "goal": msg.goal, "ep": msg.ep}
                                      if vring else {}))
            if self._lost():
                rec.lost += 1
                self.ledger.pub_lost += 1
                continue
            self._push(self.now + self.sc.hop_delay, "pub", (dst, msg, v, self.epoch))

    def _audit(self, p: int, msg: PubMsg) -> None:
        l = self.ring.l
        if msg.goal == msg.ep or not is_between(msg.goal, p, msg.ep, l):
            self.ledger.violations.append(
                (self.now, f"confinement: {p}->{msg.goal} outside segment ending {msg.ep}"))
        if msg.goal != (p + 1) % l:
            q = (p + 1) % l
            while q != msg.goal:
                u = self.ring.owner[q]
                if msg.channel in self.nodes[u].subscribed and u != msg.meta.origin:
                    self.ledger.violations.append(
                        (self.now, f"skip: shortcut {p}->{msg.goal} passes subscriber {u} at {q}"))
                    break
                q = (q + 1) % l

    def _on_pub_arrival(self, data) -> None:
        dst, msg, frm, epoch = data
        rec = self._records[(msg.meta.origin, msg.meta.seq)]
        if epoch != self.epoch or dst not in self.nodes or self._rebuilding():
            self.ledger.stale_dropped += 1
            return
        node = self.nodes[dst]
        if self.sc.protocol == "vring":
            delivered, sends = node.on_pub(msg)
            if node.diagnostics:
                self.ledger.diagnostics.extend(node.diagnostics)
                node.diagnostics.clear()
        else:
            delivered, sends = node.on_pub(msg, frm)
        if delivered:
            rec.deliveries[dst] += 1
            rec.hops.setdefault(dst, []).append(msg.meta.hops)
            if self.sc.trace:
                self.ledger.record(type="deliver", time=self.now, pub_id=rec.pub_id, node=dst,
                                   hops=msg.meta.hops)
        self._send_pubs(dst, sends, rec)

    # -- application and faults ------------------------------------------

    def _on_app(self, data) -> None:
        kind, item = data
        if item.node not in self.nodes:
            self.ledger.diagnostics.append(f"t={self.now}: node {item.node} absent, {kind} skipped")
            return
        node = self.nodes[item.node]
        if kind == "sub":
            if item.action == "subscribe":
                node.subscribe(item.channel, self.now)
            else:
                node.unsubscribe(item.channel, self.now)
            if self.sc.trace:
                self.ledger.record(type=item.action, time=self.now, node=item.node,
                                   channel=item.channel)
            self._sync_timers(item.node)
            return
        self.publish(item.node, item.channel, bytes(item.size))

    def publish(self, v: int, c: int, data: bytes) -> PubRecord:
        seq = self._pub_seq[v]
        self._pub_seq[v] += 1
        expected = frozenset(u for u, n in self.nodes.items() if c in n.subscribed and u != v)
        rec = PubRecord(len(self.ledger.publications), v, c, seq, self.now, expected)
        self._records[(v, seq)] = rec
        self.ledger.publications.append(rec)
        if self._rebuilding():
            rec.routed = False
            return rec
        sends = self.nodes[v].publish(c, data, PubMeta(v, seq))
        if self.sc.trace:
            self.ledger.record(type="publish", time=self.now, pub_id=rec.pub_id, node=v,
                               channel=c)
        self._send_pubs(v, sends, rec)
        return rec

    def _on_loss(self, loss: float) -> None:
        self.loss = loss
        self.ledger.faults.append((self.now, {"kind": "loss", "loss": loss}))

    def _on_fault(self, f: Fault) -> None:
        if f.kind == "corrupt":
            self.inject_corruption(f.node, f.channel, f.index, f.ns)
        else:
            self.churn(f.node, f.kind, f.neighbors)

    def inject_corruption(self, v: int, c: int, index: int, new_ns: int | None) -> None:
        """Overwrite one routing entry; it looks freshly renewed."""
        node = self.nodes[v]
        if isinstance(node, NodeState):
            node.table[c][index] = RoutingEntry(new_ns, self.now, None)
        else:
            nbrs = node.tree_neighbors()
            w = nbrs[index % len(nbrs)]
            row = node.directions[c]
            if new_ns is None:
                row.pop(w, None)
            else:
                row[w] = self.now
        self.ledger.faults.append((self.now, {"kind": "corrupt", "node": v, "channel": c,
                                              "index": index, "ns": new_ns}))

    def churn(self, v: int, kind: str, neighbors=()) -> None:
        """Apply a leave/join, rebuild tree and ring, restart routing tables."""
        if kind == "leave":
            g = self.base.without_node(v)
            if not g.is_connected():
                raise SimulationError(f"removing node {v} disconnects the network")
        elif kind == "join":
            g = self.base.with_node(v, neighbors)
        else:
            raise ValueError(kind)
        self.base = g
        self.epoch += 1
        self.structure = build_structure(g, self.sc.degree_cap, self.sc.seed, self.sc.root,
                                         self.sc.shortcut_mode)
        if kind == "leave":
            del self.nodes[v]
            self._sync_timers(v)
        for u, node in self.nodes.items():
            parent, children = self.tree.parent[u], self.tree.children[u]
            if isinstance(node, NodeState):
                node.reset_ring(self.ring, parent, children)
            else:
                node.reset_tree(parent, children)
        if kind == "join":
            self._add_node(v)
        self.rebuilding_until = self.now + self.sc.rebuild_latency
        self.ledger.faults.append((self.now, {"kind": kind, "node": v, "epoch": self.epoch,
                                              "ring_length": self.ring.l}))

    # -- inspection --------------------------------------------------------

    def subscribers(self, c: int) -> set[int]:
        return {u for u, n in self.nodes.items() if c in n.subscribed}

    def tables(self, c: int) -> dict[int, list[int | None]]:
        return {u: n.ns_row(c) for u, n in self.nodes.items()}


def run(sc: Scenario) -> TraceLedger:
    return Simulator(sc).run()
