import networkx as nx
import pytest
from hypothesis import given, strategies as st

from worked_examples import SMALL_EXTRA_EDGES, SMALL_TREE_EDGES
from vring_pubsub import topology
from vring_pubsub.topology import (GenerationError, Graph, SelectionError, TopologyError,
                                   bfs_distances, build_tree, central_node, format_graph,
                                   generate_er, load_graph, save_graph, select_links)


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from(g.edges)
    return h


graphs = st.builds(lambda n, p, s: (n, p, s), st.integers(2, 30), st.floats(0.15, 0.9),
                   st.integers(0, 2**32 - 1))


def sample(args):
    n, p, s = args
    try:
        return generate_er(n, p, s)
    except GenerationError:
        return None


class TestGraph:
    def test_rejects_self_loops_and_duplicates(self):
        with pytest.raises(TopologyError):
            Graph.from_edges(3, [(1, 1)])
        with pytest.raises(TopologyError):
            Graph.from_edges(3, [(0, 1), (1, 0)])
        with pytest.raises(TopologyError):
            Graph.from_edges(2, [(0, 5)])

    def test_without_and_with_node(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        h = g.without_node(3)
        assert h.nodes == {0, 1, 2} and (2, 3) not in h.edges
        k = h.with_node(7, [0, 2])
        assert k.degree(7) == 2 and k.is_connected()
        assert not g.without_node(1).is_connected()


class TestGenerateEr:
    def test_same_seed_same_graph(self):
        assert generate_er(30, 0.2, 7) == generate_er(30, 0.2, 7)

    def test_different_seeds_differ(self):
        assert generate_er(30, 0.2, 7) != generate_er(30, 0.2, 8)

    def test_complete_graph_at_p_one(self):
        g = generate_er(6, 1.0, 0)
        assert len(g.edges) == 15

    @pytest.mark.parametrize("n,p", [(1, 0.5), (5, 0.0), (5, 1.5), (5, -0.1)])
    def test_bad_parameters(self, n, p):
        with pytest.raises(TopologyError):
            generate_er(n, p, 0)

    def test_retry_budget_exhausted(self, monkeypatch):
        monkeypatch.setattr(topology, "ER_MAX_RETRIES", 3)
        with pytest.raises(GenerationError):
            generate_er(40, 0.01, 0)

    @given(graphs)
    def test_always_connected_and_simple(self, args):
        g = sample(args)
        if g is None:
            return
        h = to_nx(g)
        assert nx.is_connected(h)
        assert g.nodes == frozenset(range(args[0]))
        assert all(u < v for u, v in g.edges)


class TestSelectLinks:
    def test_no_cap_keeps_everything(self):
        g = generate_er(20, 0.4, 1)
        sel = select_links(g, None)
        assert sel.kept_edges == g.edges

    def test_cap_below_two_rejected(self):
        with pytest.raises(TopologyError):
            select_links(generate_er(5, 0.9, 0), 1)

    def test_star_cannot_be_capped(self):
        star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
        with pytest.raises(SelectionError):
            select_links(star, 2)

    def test_small_example_with_dashed_links(self):
        # the solid links plus two extra links standing in for the dashed ones
        g = Graph.from_edges(6, SMALL_TREE_EDGES + SMALL_EXTRA_EDGES + [(0, 3), (5, 2)])
        sel = select_links(g, 3, seed=0)
        assert sel.graph.max_degree() <= 3
        assert sel.graph.is_connected()
        assert sel.kept_edges <= g.edges

    def test_seeded_and_deterministic(self):
        g = generate_er(40, 0.3, 5)
        assert select_links(g, 4, 11).kept_edges == select_links(g, 4, 11).kept_edges

    @given(graphs, st.integers(2, 6), st.integers(0, 1000))
    def test_cap_respected_and_connected(self, args, cap, seed):
        g = sample(args)
        if g is None:
            return
        try:
            sel = select_links(g, cap, seed)
        except SelectionError:
            return
        assert sel.kept_edges <= g.edges
        assert sel.graph.max_degree() <= cap
        assert nx.is_connected(to_nx(sel.graph))


class TestTree:
    @given(graphs, st.data())
    def test_bfs_tree_properties(self, args, data):
        g = sample(args)
        if g is None:
            return
        root = data.draw(st.sampled_from(sorted(g.nodes)))
        tree = build_tree(g, root)
        h = to_nx(g)
        assert len(tree.edges()) == g.node_count - 1
        assert tree.edges() <= g.edges
        assert nx.is_tree(nx.Graph(list(tree.edges()))) or g.node_count == 1
        # BFS: tree depth equals graph distance
        assert tree.depth() == nx.single_source_shortest_path_length(h, root)

    def test_unknown_root(self):
        with pytest.raises(TopologyError):
            build_tree(generate_er(5, 0.9, 0), 9)

    def test_disconnected_kept_links(self):
        with pytest.raises(TopologyError):
            build_tree(Graph.from_edges(4, [(0, 1), (2, 3)]), 0)

    @given(graphs)
    def test_central_node_matches_eccentricity_oracle(self, args):
        g = sample(args)
        if g is None:
            return
        ecc = nx.eccentricity(to_nx(g))
        best = min(ecc.values())
        assert central_node(g) == min(v for v, e in ecc.items() if e == best)

    def test_bfs_distances(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        assert bfs_distances(g, 0) == {0: 0, 1: 1, 3: 1, 2: 2}


class TestGraphFiles:
    def test_round_trip(self, tmp_path):
        g = generate_er(15, 0.3, 3)
        path = tmp_path / "g.txt"
        save_graph(g, path)
        assert load_graph(path) == g
        assert path.read_text().splitlines()[0] == f"15 {len(g.edges)}"

    @pytest.mark.parametrize("text", ["", "3\n", "3 1\n0 5\n", "3 2\n0 1\n", "3 1\n0 1 2\n",
                                      "3 2\n0 1\n1 0\n"])
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(TopologyError):
            load_graph(path)

    def test_gapped_ids_not_writable(self):
        with pytest.raises(TopologyError):
            format_graph(Graph.from_edges([0, 2], [(0, 2)]))
