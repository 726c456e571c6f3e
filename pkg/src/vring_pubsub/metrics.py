"""Message gain, hop histograms, delivery ratio and the baseline sweep."""

from __future__ import annotations

import csv
import io
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .baselines import BfsForest, route_naive_ring, route_shen, route_td, route_ts, shen_directions
from .pubsub import converged_table
from .ring import VirtualRing
from .sim import Structure, TraceLedger, build_structure
from .topology import GenerationError, SelectionError, TopologyError, generate_er

log = logging.getLogger(__name__)

BASELINES = ("td", "ts", "ring", "shen")


class UndefinedGainError(ZeroDivisionError):
    """Gain against a baseline that sent nothing."""


def gain(b: int, a: int) -> float:
    """Percent extra messages of ``b`` over ``a``, to 2 decimals."""
    if a <= 0:
        raise UndefinedGainError(f"gain undefined for baseline count {a}")
    return round(float(Fraction(100 * b, a) - 100), 2)


# -- hop histogram --------------------------------------------------------

@dataclass
class HopHistogram:
    bins: dict[int, int]
    mean: float | None

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def to_csv(self) -> str:
        rows = [f"{h},{c}" for h, c in sorted(self.bins.items())]
        mean = "" if self.mean is None else f"{self.mean:.4f}"
        return "hops,count\n" + "".join(r + "\n" for r in rows) + f"mean,{mean}\n"


def histogram_from_hops(hops: Iterable[int]) -> HopHistogram:
    counts = Counter(hops)
    if not counts:
        return HopHistogram({}, None)
    top = max(counts)
    bins = {h: counts.get(h, 0) for h in range(1, top + 1)}
    n = sum(counts.values())
    return HopHistogram(bins, sum(h * c for h, c in counts.items()) / n)


def hop_histogram(ledger: TraceLedger) -> HopHistogram:
    """One entry per delivery, duplicates included."""
    return histogram_from_hops(h for r in ledger.publications for hs in r.hops.values() for h in hs)


# -- delivery ratio -------------------------------------------------------

@dataclass
class RatioWindow:
    start: float
    end: float
    expected: int
    delivered: int
    faults: list[str] = field(default_factory=list)

    @property
    def ratio(self) -> float | None:
        return None if self.expected == 0 else 100.0 * self.delivered / self.expected


def delivery_ratio(ledger: TraceLedger, window: float, start: float = 0.0,
                   end: float | None = None) -> list[RatioWindow]:
    """Delivered/expected percent over publications grouped by publish time.

    A subscriber counts as served once even if a copy arrived twice; windows
    are annotated with the faults that fall into them.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    pubs = ledger.publications
    if end is None:
        end = max([r.time for r in pubs] + [t for t, _ in ledger.faults] + [start]) + window
    n = max(1, int(np.ceil((end - start) / window)))
    out = [RatioWindow(start + i * window, start + (i + 1) * window, 0, 0) for i in range(n)]
    for r in pubs:
        i = int((r.time - start) // window)
        if 0 <= i < n:
            out[i].expected += len(r.expected)
            out[i].delivered += len(r.expected & set(r.deliveries))
    for t, f in ledger.faults:
        i = int((t - start) // window)
        if 0 <= i < n:
            label = f["kind"] + (f" loss={f['loss']}" if "loss" in f else
                                 f" node={f.get('node')}")
            out[i].faults.append(label)
    return out


def ratio_csv(windows: list[RatioWindow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start", "end", "expected", "delivered", "ratio", "faults"])
    for x in windows:
        w.writerow([x.start, x.end, x.expected, x.delivered,
                    "" if x.ratio is None else f"{x.ratio:.2f}", ";".join(x.faults)])
    return buf.getvalue()


# -- sweep ----------------------------------------------------------------

@dataclass
class SweepGrid:
    nodes: list[int]
    edge_probs: list[float]
    subscribers: list[int]
    seeds: int = 30
    degree_cap: int | None = None
    publishers: int | None = None  # None: every node publishes once
    baselines: tuple[str, ...] = BASELINES


@dataclass
class Instance:
    """Per-publication counts for every strategy on one topology."""

    n: int
    p: float
    s: int
    seed: int
    ring_length: int
    counts: dict[str, list[int]]
    hops: dict[str, list[int]]


@dataclass
class GainReport:
    instances: list[Instance] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def rows(self) -> list[dict]:
        out = []
        for inst in self.instances:
            b = sum(inst.counts["vring"])
            for name in inst.counts:
                if name == "vring":
                    continue
                a = sum(inst.counts[name])
                out.append({"n": inst.n, "p": inst.p, "s": inst.s, "seed": inst.seed,
                            "baseline": name, "B": b, "A": a,
                            "gain": gain(b, a) if a > 0 else None})
        return out

    def cells(self) -> list[dict]:
        """Mean, quartiles and median of the per-instance gain per (n, p, s, baseline)."""
        groups: dict[tuple, list[float]] = {}
        for r in self.rows():
            if r["gain"] is not None:
                groups.setdefault((r["n"], r["p"], r["s"], r["baseline"]), []).append(r["gain"])
        out = []
        for key in sorted(groups):
            g = np.asarray(groups[key])
            q1, med, q3 = np.percentile(g, [25, 50, 75])
            out.append({"n": key[0], "p": key[1], "s": key[2], "baseline": key[3],
                        "count": len(g), "mean": round(float(g.mean()), 2),
                        "q1": round(float(q1), 2), "median": round(float(med), 2),
                        "q3": round(float(q3), 2)})
        return out

    def mean_gain(self, baseline: str) -> float:
        g = [r["gain"] for r in self.rows() if r["baseline"] == baseline and r["gain"] is not None]
        return float(np.mean(g)) if g else float("nan")

    def density_trend(self, baseline: str) -> list[dict]:
        """Per (n, s): medians ordered by edge probability and whether they fall."""
        cells = [c for c in self.cells() if c["baseline"] == baseline]
        by: dict[tuple, list[tuple[float, float]]] = {}
        for c in cells:
            by.setdefault((c["n"], c["s"]), []).append((c["p"], c["median"]))
        out = []
        for (n, s), pts in sorted(by.items()):
            pts.sort()
            meds = [m for _, m in pts]
            out.append({"n": n, "s": s, "baseline": baseline, "medians": meds,
                        "decreasing": all(a >= b for a, b in zip(meds, meds[1:]))})
        return out

    @staticmethod
    def _csv(rows: list[dict]) -> str:
        if not rows:
            return ""
        buf = io.StringIO()
        w = csv.DictWriter(buf, list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()

    def rows_csv(self) -> str:
        return self._csv(self.rows())

    def cells_csv(self) -> str:
        return self._csv(self.cells())


def instance_seed(n: int, p: float, s: int, seed: int) -> int:
    return random.Random(f"{n}:{p!r}:{s}:{seed}").getrandbits(32)


def _ns_array(ring: VirtualRing, subscribers) -> np.ndarray:
    arr = ring.arrays
    is_sub = np.zeros(arr.node_count, dtype=np.uint8)
    for v in subscribers:
        is_sub[v] = 1
    return kernels.next_subscriber_table(arr.owner, is_sub)


def measure(st: Structure, subscribers, publishers, baselines=BASELINES) -> tuple[dict, dict]:
    """Transmission counts and delivery hops per strategy for each publisher."""
    ring, tree, g = st.ring, st.tree, st.selection.graph
    arr = ring.arrays
    ns = _ns_array(ring, subscribers)
    forest = BfsForest(g)
    dirs = shen_directions(tree, subscribers)
    subs = set(subscribers)
    counts = {k: [] for k in ("vring",) + tuple(baselines)}
    hops = {k: [] for k in counts}
    for v in publishers:
        src, dst, h = kernels.route_publication(arr.owner, arr.pos_start, arr.pos_list,
                                                arr.pos_index, arr.sc_start, arr.sc_list, ns, v)
        counts["vring"].append(len(src))
        seen = set()
        for d, k in zip(dst.tolist(), h.tolist()):
            u = ring.owner[d]
            if u in subs and u != v and u not in seen:
                seen.add(u)
                hops["vring"].append(k)
        for name in baselines:
            if name == "td":
                res = route_td(g, v, subs, forest)
            elif name == "ts":
                res = route_ts(tree, v, subs)
            elif name == "ring":
                res = route_naive_ring(ring, v, subs)
            elif name == "shen":
                res = route_shen(tree, v, subs, dirs)
            else:
                raise ValueError(f"unknown baseline {name!r}")
            counts[name].append(res.count)
            hops[name].extend(res.hops.values())
    return counts, hops


def run_instance(n: int, p: float, s: int, seed: int, degree_cap: int | None = None,
                 publishers: int | None = None, baselines=BASELINES) -> Instance:
    base = instance_seed(n, p, s, seed)
    g = generate_er(n, p, base)
    st = build_structure(g, degree_cap, base)
    rng = random.Random(base + 1)
    subs = sorted(rng.sample(sorted(g.nodes), min(s, n)))
    pubs = sorted(g.nodes) if publishers is None else sorted(
        rng.sample(sorted(g.nodes), min(publishers, n)))
    counts, hops = measure(st, subs, pubs, baselines)
    return Instance(n, p, s, seed, st.ring.l, counts, hops)


def sweep(grid: SweepGrid) -> GainReport:
    """Every (n, p, s, seed) in order; failing cells are skipped with a note."""
    if not (grid.nodes and grid.edge_probs and grid.subscribers and grid.seeds > 0):
        raise ValueError("empty sweep grid")
    report = GainReport()
    for n in grid.nodes:
        for p in grid.edge_probs:
            for s in grid.subscribers:
                for seed in range(grid.seeds):
                    try:
                        inst = run_instance(n, p, s, seed, grid.degree_cap, grid.publishers,
                                            grid.baselines)
                    except (GenerationError, SelectionError, TopologyError) as exc:
                        report.notes.append(f"n={n} p={p} s={s} seed={seed}: skipped ({exc})")
                        log.warning("sweep cell skipped: %s", exc)
                        continue
                    report.instances.append(inst)
    return report
