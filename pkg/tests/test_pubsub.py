import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from worked_examples import (BIG_POS, BIG_SUBS, BIG_TABLE, SMALL_SUBS, big_selection, big_tree,
                     small_selection, small_tree)
from vring_pubsub.pubsub import (NodeState, ProtocolError, PubMeta, PubMsg, RoutingEntry, SubMsg,
                                 Timings, converged_table, route_static)
from vring_pubsub.ring import VirtualRing, build_ring
from vring_pubsub.topology import build_tree, generate_er

T = Timings(100.0, 25.0, 200.0)


def synthetic_ring(l, own):
    """Ring of length ``l`` where node 0 owns ``own`` and every other slot is unique."""
    seq = [i + 1 for i in range(l)]
    for p in own:
        seq[p] = 0
    pos = {}
    for i, v in enumerate(seq):
        pos.setdefault(v, []).append(i)
    return VirtualRing(tuple(seq), {v: tuple(ps) for v, ps in pos.items()}, {})


def node_with(own, row, l=24, now=0.0):
    node = NodeState(0, synthetic_ring(l, own), 1, T)
    node.table[0] = [RoutingEntry(ns, now) for ns in row]
    return node


class TestUpdSn:
    def test_worked_example(self):
        node = node_with((5, 12, 18), (14, 14, 20))
        node.upd_sn(0, [3, 7], 1.0)
        assert node.ns_row(0) == [7, 14, 20]

    def test_empty_entry_accepts_anything(self):
        node = NodeState(0, synthetic_ring(24, (5, 12)), 1, T)
        node.upd_sn(0, [20], 3.0)
        assert node.ns_row(0) == [20, 20]
        assert node.table[0][0].ts == 3.0

    def test_own_positions_ignored(self):
        node = node_with((5, 12), (9, 20))
        node.upd_sn(0, [12], 1.0)
        assert node.ns_row(0) == [9, 20]

    def test_fresh_entry_does_not_collect_nstmp(self):
        node = node_with((5,), (9,))
        node.upd_sn(0, [15], 50.0)
        assert node.table[0][0].nstmp is None

    def test_stale_entry_collects_closest_nstmp(self):
        node = node_with((5,), (9,))
        node.upd_sn(0, [15], 150.0)
        node.upd_sn(0, [20], 151.0)
        node.upd_sn(0, [12], 152.0)
        e = node.table[0][0]
        assert (e.ns, e.nstmp) == (9, 12)

    def test_renewal_clears_nstmp(self):
        node = node_with((5,), (9,))
        node.upd_sn(0, [15], 150.0)
        node.upd_sn(0, [9], 151.0)
        e = node.table[0][0]
        assert (e.ns, e.ts, e.nstmp) == (9, 151.0, None)

    def test_write_back_after_t_wb(self):
        node = node_with((5,), (9,))
        node.upd_sn(0, [15], 150.0)
        node.on_timer_clean(200.0)
        assert node.ns_row(0) == [9]
        node.on_timer_clean(201.0)
        e = node.table[0][0]
        assert (e.ns, e.ts, e.nstmp) == (15, 201.0, None)
        assert node.writebacks == 1
        assert node.timer_clean == 201.0 + T.t_clean

    def test_stale_without_candidate_keeps_ns(self):
        node = node_with((5,), (9,))
        node.on_timer_clean(1000.0)
        assert node.ns_row(0) == [9]

    @given(st.lists(st.integers(0, 23), min_size=1, max_size=8))
    def test_converges_to_first_subscriber(self, sps):
        node = NodeState(0, synthetic_ring(24, (5, 12, 18)), 1, T)
        node.upd_sn(0, sps, 0.0)
        others = [q for q in sps if q not in (5, 12, 18)]
        for p, ns in zip((5, 12, 18), node.ns_row(0)):
            if not others:
                assert ns is None
            else:
                assert ns == min(others, key=lambda q: (q - p) % 24)


class TestTimersAndSub:
    def setup_method(self):
        self.tree = small_tree()
        self.ring = build_ring(self.tree, small_selection())

    def node(self, v):
        return NodeState(v, self.ring, 2, T, self.tree.parent[v], self.tree.children[v])

    def test_subscribe_arms_immediately_then_periodically(self):
        n = self.node(3)
        n.subscribe(0, 5.0)
        assert n.timer_sub == 5.0
        msg = n.on_timer_sub(5.0)
        assert msg == SubMsg(None, frozenset({0}), (2, 4))
        assert n.timer_sub == 105.0

    def test_second_channel_does_not_rearm_twice(self):
        n = self.node(3)
        n.subscribe(0, 5.0)
        n.on_timer_sub(5.0)
        n.subscribe(0, 7.0)
        assert n.timer_sub == 105.0
        n.subscribe(1, 7.0)
        assert n.timer_sub == 7.0

    def test_unsubscribe_disarms_on_next_fire(self):
        n = self.node(3)
        n.subscribe(0, 0.0)
        n.on_timer_sub(0.0)
        n.unsubscribe(0, 1.0)
        assert n.on_timer_sub(100.0) is None
        assert n.timer_sub is None

    def test_unknown_channel(self):
        with pytest.raises(ProtocolError):
            self.node(3).subscribe(5, 0.0)

    def test_relay_rules(self):
        e = self.node(5)  # children c and d
        msg = SubMsg(None, frozenset({0, 1}), (0,))
        relay = e.on_sub(msg, 0, 1.0)
        assert relay == SubMsg(0, frozenset({0, 1}), (0,))
        e.subscribe(1, 1.0)
        assert e.on_sub(msg, 0, 2.0) == SubMsg(0, frozenset({0}), (0,))
        e.subscribe(0, 2.0)
        assert e.on_sub(msg, 0, 3.0) is None

    def test_own_relay_dropped(self):
        n = self.node(5)
        assert n.on_sub(SubMsg(5, frozenset({0}), (0,)), 3, 1.0) is None
        assert n.ns_row(0) == [None, None, None]

    def test_leaf_does_not_relay(self):
        a = self.node(1)
        assert a.on_sub(SubMsg(None, frozenset({0}), (2,)), 3, 1.0) is None
        assert a.ns_row(0) == [2]

    def test_malformed_sub_diagnosed(self):
        n = self.node(5)
        assert n.on_sub(SubMsg(None, frozenset({0}), (99,)), 3, 1.0) is None
        assert n.diagnostics


class TestForwarding:
    def states(self, tree, ring, subs, rule="segment"):
        table = converged_table(ring, subs)
        out = {}
        for v in tree.nodes:
            s = NodeState(v, ring, 1, T, tree.parent[v], tree.children[v], rule)
            s.table[0] = [RoutingEntry(q, 0.0) for q in table[v]]
            if v in subs:
                s.subscribed.add(0)
            out[v] = s
        return out

    def flood(self, states, ring, publisher):
        sends = [(p, m) for p, m in states[publisher].publish(0, b"x", PubMeta(publisher, 0))]
        tx, got = [], []
        while sends:
            p, m = sends.pop(0)
            tx.append((p, m.goal, m.ep))
            delivered, more = states[ring.owner[m.goal]].on_pub(m)
            if delivered:
                got.append(ring.owner[m.goal])
            sends.extend(more)
        return tx, got

    def test_small_example_publish_from_d(self):
        tree, ring = small_tree(), build_ring(small_tree(), small_selection())
        tx, got = self.flood(self.states(tree, ring, SMALL_SUBS), ring, 4)
        assert sorted(tx) == [(2, 3, 4), (6, 7, 8), (8, 2, 6)]
        assert sorted(got) == [1, 2, 3]

    def test_eleven_node_table(self):
        ring = build_ring(big_tree(), big_selection())
        assert converged_table(ring, BIG_SUBS) == BIG_TABLE
        assert ring.pos == BIG_POS

    def test_literal_rule_sends_extra_copy(self):
        tree, ring = big_tree(), build_ring(big_tree(), big_selection())
        tx, got = self.flood(self.states(tree, ring, BIG_SUBS, "literal"), ring, 1)
        seg, _ = self.flood(self.states(tree, ring, BIG_SUBS), ring, 1)
        assert len(seg) == 7
        assert len(tx) > len(seg)

    def test_calc_new_ep(self):
        tree, ring = small_tree(), build_ring(small_tree(), small_selection())
        e = NodeState(5, ring, 1, T)
        assert e.calc_new_ep(1, 1) == 5
        assert e.calc_new_ep(5, 7) == 7
        a = NodeState(1, ring, 1, T)
        assert a.calc_new_ep(3, 4) == 4

    def test_handled_positions_stop_at_segment_end(self):
        ring = build_ring(small_tree(), small_selection())
        e = NodeState(5, ring, 1, T)
        assert e.handled_positions(1, 1) == [1, 5, 9]
        assert e.handled_positions(5, 1) == [5, 9]
        assert e.handled_positions(5, 9) == [5]

    def test_on_pub_rejects_foreign_goal(self):
        ring = build_ring(small_tree(), small_selection())
        e = NodeState(5, ring, 1, T)
        delivered, sends = e.on_pub(PubMsg(3, 4, 0, b"", PubMeta(0, 0)))
        assert not delivered and not sends and e.diagnostics

    def test_empty_tables_send_nothing(self):
        ring = build_ring(small_tree(), small_selection())
        assert NodeState(4, ring, 1, T).publish(0, b"", PubMeta(4, 0)) == []

    def test_hops_count_up(self):
        ring = build_ring(big_tree(), big_selection())
        res = route_static(ring, 1, BIG_SUBS)
        assert res.hops == {2: 1, 4: 2, 9: 4}


def random_instance(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 30)
    g = generate_er(n, 1.0 if n < 4 else rng.uniform(0.2, 0.7), seed)
    tree = build_tree(g, rng.randrange(n))
    from vring_pubsub.topology import LinkSelection
    ring = build_ring(tree, LinkSelection(g, g.edges, None))
    return rng, n, ring


@given(st.integers(0, 10**6))
def test_exactly_once_with_converged_tables(seed):
    rng, n, ring = random_instance(seed)
    subs = set(rng.sample(range(n), rng.randint(0, n)))
    pub = rng.randrange(n)
    res = route_static(ring, pub, subs)
    assert res.delivered == subs - {pub}
    # every node, subscriber or not, receives at most one copy
    got = Counter(ring.owner[q] for _, q in res.paths)
    assert all(c == 1 for c in got.values())


@given(st.integers(0, 10**6))
def test_no_duplicates_for_arbitrary_tables(seed):
    """Segment confinement holds whatever the table says."""
    rng, n, ring = random_instance(seed)
    table = {v: [rng.choice([None] + list(range(ring.l))) for _ in ps]
             for v, ps in ring.pos.items()}
    res = route_static(ring, rng.randrange(n), set(), table)
    dsts = [q for _, q in res.paths]
    assert len(dsts) == len(set(dsts))
    assert res.count < ring.l
