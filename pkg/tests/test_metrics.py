from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from worked_examples import BIG_EXTRA_EDGES, BIG_SUBS, BIG_TREE_EDGES
from vring_pubsub.metrics import (GainReport, SweepGrid, UndefinedGainError, delivery_ratio,
                                  gain, histogram_from_hops, hop_histogram, measure, ratio_csv,
                                  run_instance, sweep)
from vring_pubsub.sim import (LossChange, Publication, Scenario, SubAction, build_structure, run)
from vring_pubsub.topology import Graph


class TestGain:
    @pytest.mark.parametrize("b,a,want", [(7, 12, -41.67), (5, 5, 0.0), (15, 10, 50.0),
                                          (0, 3, -100.0), (1, 3, -66.67)])
    def test_values(self, b, a, want):
        assert gain(b, a) == want

    def test_zero_baseline(self):
        with pytest.raises(UndefinedGainError):
            gain(3, 0)

    @given(st.integers(0, 10**6), st.integers(1, 10**6))
    def test_relations(self, b, a):
        g = gain(b, a)
        assert abs(g - float(-100 * (1 - Fraction(b, a)))) <= 0.005
        assert (g == 0) == (b == a) or abs(b - a) / a < 5e-5


class TestHistogram:
    def test_adjacent_single_subscriber(self):
        sc = Scenario(nodes=2, edges=[(0, 1)], subscriptions=[SubAction(0, 1)],
                      publications=[Publication(10 + k, 0) for k in range(5)], duration=30)
        h = hop_histogram(run(sc))
        assert h.bins == {1: 5} and h.mean == 1.0

    @pytest.mark.parametrize("protocol", ["vring", "shen"])
    def test_star_hub_subscriber(self, protocol):
        star = [(0, i) for i in range(1, 8)]
        sc = Scenario(nodes=8, edges=star, protocol=protocol, subscriptions=[SubAction(0, 0)],
                      publications=[Publication(20 + v, v) for v in range(1, 8)], duration=60)
        h = hop_histogram(run(sc))
        assert h.bins == {1: 7}

    def test_star_baselines_one_hop(self):
        g = Graph.from_edges(8, [(0, i) for i in range(1, 8)])
        st_ = build_structure(g, None, 0, 0)
        _, hops = measure(st_, [0], range(1, 8))
        assert all(set(h) == {1} for name, h in hops.items() if name != "ring")

    def test_total_matches_deliveries(self):
        sc = Scenario(nodes=11, edges=BIG_TREE_EDGES + BIG_EXTRA_EDGES, root=0,
                      subscriptions=[SubAction(0, v) for v in sorted(BIG_SUBS)],
                      publications=[Publication(60, 1), Publication(61, 8)], duration=100)
        led = run(sc)
        h = hop_histogram(led)
        assert h.total == sum(sum(r.deliveries.values()) for r in led.publications)
        assert h.bins == {1: 3, 2: 1, 3: 0, 4: 2}

    def test_empty(self):
        assert histogram_from_hops([]).mean is None
        assert "mean," in histogram_from_hops([2, 2, 3]).to_csv()

    def test_single_subscriber_ring_routes_shorter_than_tree(self):
        rep = sweep(SweepGrid([60], [0.05, 0.1, 0.2, 0.3], [1], seeds=10, baselines=("shen",)))
        ring = np.mean([h for i in rep.instances for h in i.hops["vring"]])
        tree = np.mean([h for i in rep.instances for h in i.hops["shen"]])
        assert ring < tree


def lossy(loss, schedule=(), duration=2000):
    return Scenario(nodes=12, edge_prob=0.4, seed=5, loss=loss, loss_schedule=list(schedule),
                    subscriptions=[SubAction(0, v) for v in (1, 3, 6, 9)],
                    publications=[Publication(t, t % 12) for t in range(100, duration - 50, 3)],
                    duration=duration)


class TestDeliveryRatio:
    def test_zero_loss_flat(self):
        w = delivery_ratio(run(lossy(0.0)), 200, start=100, end=1900)
        assert [x.ratio for x in w] == [100.0] * len(w)

    def test_pulse_dips_then_recovers(self):
        led = run(lossy(0.0, [LossChange(600, 0.3), LossChange(900, 0.0)]))
        w = delivery_ratio(led, 100, start=100, end=1900)
        by = {x.start: x.ratio for x in w}
        assert min(by[600], by[700], by[800]) < 100
        # the window before the pulse may hold copies still in flight at its start
        assert all(by[t] == 100 for t in (100, 200, 300, 400))
        assert all(by[t] == 100 for t in range(1400, 1900, 100))
        assert any("loss" in f for x in w for f in x.faults)

    @pytest.mark.parametrize("seed", range(5))
    def test_sustained_loss_strictly_between(self, seed):
        sc = lossy(0.05)
        sc.seed = seed
        w = delivery_ratio(run(sc), 600, start=100, end=1900)
        assert all(0 < x.ratio < 100 for x in w)

    def test_window_must_be_positive(self):
        with pytest.raises(ValueError):
            delivery_ratio(run(lossy(0.0, duration=300)), 0)

    def test_csv(self):
        text = ratio_csv(delivery_ratio(run(lossy(0.0, duration=300)), 100, start=100, end=300))
        assert text.splitlines()[0] == "start,end,expected,delivered,ratio,faults"


class TestSweep:
    def test_reproducible_bytes(self):
        grid = SweepGrid([20, 30], [0.2, 0.3], [5], seeds=3)
        assert sweep(grid).rows_csv() == sweep(grid).rows_csv()
        assert sweep(grid).cells_csv() == sweep(grid).cells_csv()

    def test_full_subscription_matches_tree_routing(self):
        inst = run_instance(30, 0.2, 30, 0, baselines=("shen", "ts"))
        assert inst.counts["vring"] == inst.counts["shen"] == inst.counts["ts"]
        assert all(c == 29 for c in inst.counts["vring"])

    def test_failed_cells_noted(self):
        rep = sweep(SweepGrid([40], [0.005], [5], seeds=2))
        assert not rep.instances and len(rep.notes) == 2

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            sweep(SweepGrid([], [0.1], [1]))

    def test_denser_networks_save_more_than_naive_ring(self):
        rep = sweep(SweepGrid([50, 100], [0.1, 0.3], [10], seeds=10, baselines=("ring",)))
        trend = rep.density_trend("ring")
        assert all(t["decreasing"] for t in trend)

    def test_cell_aggregates(self):
        rep = sweep(SweepGrid([20], [0.3], [5], seeds=4, baselines=("td",)))
        (cell,) = rep.cells()
        g = [r["gain"] for r in rep.rows()]
        assert cell["count"] == 4
        assert cell["median"] == round(float(np.median(g)), 2)
        assert cell["q1"] <= cell["median"] <= cell["q3"]

    def test_report_skips_undefined_gain(self):
        rep = GainReport()
        rep.instances.append(run_instance(10, 0.5, 1, 0, baselines=("td",)))
        assert all(r["A"] > 0 or r["gain"] is None for r in rep.rows())
