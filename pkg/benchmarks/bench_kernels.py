"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--nodes 200] [--repeat 5]
"""

import argparse
import random
import timeit

import numpy as np

from vring_pubsub import kernels
from vring_pubsub.baselines import _csr
from vring_pubsub.ring import build_ring
from vring_pubsub.topology import LinkSelection, build_tree, central_node, generate_er


def workload(n: int, p: float, seed: int):
    g = generate_er(n, p, seed)
    ring = build_ring(build_tree(g, central_node(g)), LinkSelection(g, g.edges, None))
    rng = random.Random(seed)
    is_sub = np.zeros(n, dtype=np.uint8)
    is_sub[rng.sample(range(n), max(1, n // 5))] = 1
    return g, ring, is_sub


def bench(mod, g, ring, is_sub, number):
    a = ring.arrays
    start, flat, _ = _csr(g)
    ns = mod.next_subscriber_table(a.owner, is_sub)
    pubs = list(g.nodes)

    def route_all():
        for v in pubs:
            mod.route_publication(a.owner, a.pos_start, a.pos_list, a.pos_index, a.sc_start,
                                  a.sc_list, ns, v)

    def bfs_all():
        for v in pubs:
            mod.bfs_parents(start, flat, v)

    return {
        "next_subscriber_table": timeit.timeit(
            lambda: mod.next_subscriber_table(a.owner, is_sub), number=number) / number,
        "route_publication x n": timeit.timeit(route_all, number=number) / number,
        "bfs_parents x n": timeit.timeit(bfs_all, number=number) / number,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--edge-prob", type=float, default=0.05)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    g, ring, is_sub = workload(args.nodes, args.edge_prob, args.seed)
    print(f"n={args.nodes} p={args.edge_prob} l={ring.l} edges={len(g.edges)}")
    py = bench(kernels.python, g, ring, is_sub, args.repeat)
    if kernels.compiled is None:
        print("compiled extension not available; python timings only")
        for k, v in py.items():
            print(f"{k:24s} python {v * 1e3:9.3f} ms")
        return
    cy = bench(kernels.compiled, g, ring, is_sub, args.repeat)
    print(f"{'kernel':24s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for k in py:
        print(f"{k:24s} {py[k] * 1e3:10.3f} {cy[k] * 1e3:10.3f} {py[k] / cy[k]:7.1f}x")


if __name__ == "__main__":
    main()
