"""Command-line driver: gen, ring, run, sweep, report.

Exit codes: 0 ok, 2 invalid input, 3 no connected topology could be generated.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from .baselines import route_naive_ring, route_shen, route_td, route_ts
from .metrics import (BASELINES, SweepGrid, delivery_ratio, gain, hop_histogram, ratio_csv,
                      sweep)
from .sim import (Publication, Scenario, ScenarioError, SimulationError, Simulator, SubAction,
                  TraceLedger, build_structure)
from .topology import (GenerationError, SelectionError, TopologyError, format_graph,
                       generate_er, load_graph)

EXIT_OK, EXIT_INVALID, EXIT_GENERATION = 0, 2, 3

log = logging.getLogger("vring_pubsub")


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(x) for x in text.split(",") if x]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def _topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", type=int, help="node count for a generated G(n, p)")
    p.add_argument("--edge-prob", type=float, help="edge probability for a generated G(n, p)")
    p.add_argument("--graph", help="edge-list file ('n m' header, then 'u v' lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree-cap", type=int, help="prune links to at most this degree")


def _graph(args):
    if args.graph:
        return load_graph(args.graph)
    if args.nodes is None or args.edge_prob is None:
        raise TopologyError("need --graph or both --nodes and --edge-prob")
    return generate_er(args.nodes, args.edge_prob, args.seed)


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def cmd_gen(args) -> int:
    _emit(format_graph(_graph(args)), args.out, "graph.txt")
    return EXIT_OK


def cmd_ring(args) -> int:
    g = _graph(args)
    st = build_structure(g, args.degree_cap, args.seed, args.root)
    _emit(st.ring.dump(), args.out, "ring.txt")
    return EXIT_OK


def scenario_from_args(args) -> Scenario:
    """Build a single-channel scenario from flags, or load ``--scenario``."""
    if args.scenario:
        sc = Scenario.load(args.scenario)
    else:
        n = load_graph(args.graph).node_count if args.graph else args.nodes
        if n is None:
            raise ScenarioError(["nodes: required without --scenario or --graph"])
        sc = Scenario(nodes=n, edge_prob=None if args.graph else args.edge_prob,
                      graph_file=args.graph, degree_cap=args.degree_cap,
                      channels=args.channels, seed=args.seed)
        rng = random.Random(f"run:{args.seed}")
        ids = list(range(n))
        s = min(args.subscribers, n)
        sc.subscriptions = [SubAction(0.0, v, rng.randrange(args.channels))
                            for v in sorted(rng.sample(ids, s))]
        warmup = 4.0 * n
        sc.publications = [Publication(warmup + k * args.pub_interval, rng.choice(ids),
                                       rng.randrange(args.channels))
                           for k in range(args.publications)]
    for flag, attr in (("loss", "loss"), ("duration", "duration"), ("delta_s", "delta_s")):
        v = getattr(args, flag)
        if v is not None:
            setattr(sc, attr, v)
    if args.baseline == "shen":
        sc.protocol = "shen"
    return sc


def cmd_run(args) -> int:
    sc = scenario_from_args(args)
    sim = Simulator(sc)
    ledger = sim.run()
    out = Path(args.out) if args.out else None
    if out:
        ledger.write(out)
        (out / "scenario.json").write_text(json.dumps(sc.to_dict(), indent=2) + "\n")
    if args.baseline in ("ring", "td", "ts"):
        text = _baseline_csv(sim, ledger, args.baseline)
        _emit(text, args.out, f"baseline_{args.baseline}.csv")
    pubs = ledger.publications
    ok = sum(r.exactly_once() for r in pubs)
    print(f"protocol={sc.protocol} ring_length={ledger.ring_length} publications={len(pubs)} "
          f"exactly_once={ok} pub_tx={ledger.pub_tx} sub_tx={ledger.sub_tx} "
          f"writebacks={len(ledger.writebacks)}", file=sys.stderr)
    return EXIT_OK


def _baseline_csv(sim: Simulator, ledger: TraceLedger, name: str) -> str:
    """Static baseline counts next to the simulated count of every publication."""
    st = sim.structure
    lines = ["pub_id,tx_count,baseline,baseline_count,gain"]
    for r in ledger.publications:
        subs = set(r.expected)
        if name == "ring":
            a = route_naive_ring(st.ring, r.origin, subs).count
        elif name == "td":
            a = route_td(st.selection.graph, r.origin, subs).count
        elif name == "ts":
            a = route_ts(st.tree, r.origin, subs).count
        else:
            a = route_shen(st.tree, r.origin, subs).count
        g = f"{gain(r.tx, a):.2f}" if a > 0 else ""
        lines.append(f"{r.pub_id},{r.tx},{name},{a},{g}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    grid = SweepGrid(args.nodes, args.edge_prob, args.subscribers, args.seeds, args.degree_cap,
                     args.publishers, tuple(args.baseline) if args.baseline else BASELINES)
    rep = sweep(grid)
    _emit(rep.rows_csv(), args.out, "rows.csv")
    _emit(rep.cells_csv(), args.out, "cells.csv")
    trend = ["n,s,baseline,medians,decreasing"]
    for b in grid.baselines:
        for t in rep.density_trend(b):
            meds = " ".join(f"{m:.2f}" for m in t["medians"])
            trend.append(f"{t['n']},{t['s']},{b},{meds},{int(t['decreasing'])}")
    _emit("\n".join(trend) + "\n", args.out, "trend.csv")
    if rep.notes:
        _emit("\n".join(rep.notes) + "\n", args.out, "notes.txt")
    for b in grid.baselines:
        print(f"mean gain vs {b}: {rep.mean_gain(b):.2f}%", file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    ledger = TraceLedger.from_jsonl(Path(args.ledger).read_text())
    _emit(ledger.summary_csv(), args.out, "summary.csv")
    _emit(hop_histogram(ledger).to_csv(), args.out, "hops.csv")
    window = args.window or max(ledger.delta_s, 1.0)
    _emit(ratio_csv(delivery_ratio(ledger, window)), args.out, "ratio.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vring-pubsub",
                                 description="Publish/subscribe on virtual rings")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a connected G(n, p) edge list")
    _topology_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ring", help="build and dump the virtual ring")
    _topology_args(p)
    p.add_argument("--root", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("run", help="simulate one scenario")
    _topology_args(p)
    p.add_argument("--scenario", help="scenario JSON; flags below override its fields")
    p.add_argument("--subscribers", type=int, default=1)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--publications", type=int, default=10)
    p.add_argument("--pub-interval", type=float, default=10.0)
    p.add_argument("--loss", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--delta-s", type=float)
    p.add_argument("--baseline", choices=("ring", "td", "ts", "shen"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="message counts against the baselines over a grid")
    p.add_argument("--nodes", type=_csv_list(int), required=True)
    p.add_argument("--edge-prob", type=_csv_list(float), required=True)
    p.add_argument("--subscribers", type=_csv_list(int), required=True)
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--degree-cap", type=int)
    p.add_argument("--publishers", type=int, help="publishers per instance (default: all)")
    p.add_argument("--baseline", choices=BASELINES, action="append")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="ledger to summary, hop and delivery-ratio CSVs")
    p.add_argument("--ledger", required=True)
    p.add_argument("--window", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (GenerationError, SelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (TopologyError, SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
