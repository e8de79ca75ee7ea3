import io

import numpy as np
import pytest

from ergmix.graph import (
    EDGES,
    TRIANGLES,
    TWOSTARS,
    Graph,
    as_graph,
    change_stats,
    degree_stats,
    density,
    format_edge_list,
    load_karate,
    parse_adjacency_csv,
    parse_edge_list,
    sufficient_stats,
    toggle_edge,
)

ALL = (EDGES, TWOSTARS, TRIANGLES)


def random_graph(n, p, rng):
    adj = np.zeros((n, n), dtype=int)
    iu = np.triu_indices(n, k=1)
    hit = rng.random(iu[0].shape[0]) < p
    adj[iu[0][hit], iu[1][hit]] = 1
    return as_graph(adj + adj.T)


def brute_stats(g):
    """Triple-scan recount of all three statistics, O(n^3)."""
    a = g.adjacency()
    n = g.n
    edges = sum(int(a[i, j]) for i in range(n) for j in range(i + 1, n))
    twostars = 0
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                if j != i and k != i and a[i, j] and a[i, k]:
                    twostars += 1
    triangles = 0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if a[i, j] and a[j, k] and a[i, k]:
                    triangles += 1
    return np.array([edges, twostars, triangles])


class TestGraphBasics:
    def test_empty_graph(self):
        g = Graph(5)
        assert g.n == 5
        assert g.n_edges == 0
        assert g.edges() == []
        assert np.all(g.degrees() == 0)

    def test_bad_node_count(self):
        with pytest.raises(ValueError):
            Graph(0)

    def test_toggle_and_query(self):
        g = Graph(4)
        g2 = toggle_edge(g, 0, 2)
        assert not g.has_edge(0, 2)
        assert g2.has_edge(0, 2)
        assert g2.has_edge(2, 0)
        assert g2.n_edges == 1
        g3 = toggle_edge(g2, 2, 0)
        assert g3.n_edges == 0
        assert g3 == g

    def test_self_loop_rejected(self):
        g = Graph(4)
        with pytest.raises(ValueError):
            toggle_edge(g, 1, 1)
        with pytest.raises(ValueError):
            g.has_edge(2, 2)

    def test_out_of_range_rejected(self):
        g = Graph(4)
        with pytest.raises(ValueError):
            g.has_edge(0, 4)
        with pytest.raises(ValueError):
            g.has_edge(-1, 2)

    def test_edges_sorted(self):
        rng = np.random.default_rng(5)
        g = random_graph(8, 0.4, rng)
        e = g.edges()
        assert all(i < j for i, j in e)
        assert e == sorted(e)
        assert len(e) == g.n_edges

    def test_equality_and_hash(self):
        rng = np.random.default_rng(6)
        g = random_graph(6, 0.5, rng)
        h = as_graph(g.adjacency())
        assert g == h
        assert hash(g) == hash(h)
        if g.n_edges:
            i, j = g.edges()[0]
            assert toggle_edge(g, i, j) != g


class TestAsGraph:
    def test_accepts_int_float_bool(self):
        m = np.array([[0, 1], [1, 0]])
        for dtype in (int, float, bool):
            g = as_graph(m.astype(dtype))
            assert g.n_edges == 1

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            as_graph(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        m = np.zeros((3, 3))
        m[0, 1] = 1
        with pytest.raises(ValueError):
            as_graph(m)

    def test_rejects_nonbinary(self):
        m = np.zeros((3, 3))
        m[0, 1] = m[1, 0] = 2
        with pytest.raises(ValueError):
            as_graph(m)

    def test_rejects_nonzero_diagonal(self):
        m = np.eye(3)
        with pytest.raises(ValueError):
            as_graph(m)

    def test_rejects_wrong_ndim(self):
        with pytest.raises(ValueError):
            as_graph(np.zeros(4))


class TestStatistics:
    def test_triangle_graph(self):
        g = Graph(3)
        g = toggle_edge(g, 0, 1)
        g = toggle_edge(g, 1, 2)
        g = toggle_edge(g, 0, 2)
        assert list(sufficient_stats(g, ALL)) == [3, 3, 1]

    def test_star_graph(self):
        # hub with 4 spokes: C(4,2) = 6 two-paths, no triangles
        g = Graph(5)
        for leaf in range(1, 5):
            g = toggle_edge(g, 0, leaf)
        assert list(sufficient_stats(g, ALL)) == [4, 6, 0]

    def test_matches_brute_force_on_random_graphs(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(3, 8))
            g = random_graph(n, float(rng.random()), rng)
            assert np.array_equal(sufficient_stats(g, ALL), brute_stats(g))

    def test_stat_order_follows_request(self):
        rng = np.random.default_rng(9)
        g = random_graph(6, 0.5, rng)
        full = sufficient_stats(g, ALL)
        flipped = sufficient_stats(g, (TRIANGLES, EDGES))
        assert flipped[0] == full[2]
        assert flipped[1] == full[0]

    def test_unknown_stat_rejected(self):
        g = Graph(3)
        with pytest.raises(ValueError):
            sufficient_stats(g, ("edges", "stars"))

    def test_duplicate_stat_rejected(self):
        g = Graph(3)
        with pytest.raises(ValueError):
            sufficient_stats(g, ("edges", "edges"))

    def test_degree_stats(self):
        rng = np.random.default_rng(11)
        g = random_graph(7, 0.4, rng)
        t = degree_stats(g)
        assert t.sum() == 2 * g.n_edges
        a = g.adjacency()
        assert np.array_equal(t, a.sum(axis=1))

    def test_density(self):
        g = Graph(4)
        g = toggle_edge(g, 0, 1)
        assert density(g) == pytest.approx(1 / 6)
        with pytest.raises(ValueError):
            density(Graph(1))


class TestChangeStats:
    def test_matches_toggle_difference(self):
        rng = np.random.default_rng(77)
        for _ in range(60):
            n = int(rng.integers(3, 9))
            g = random_graph(n, float(rng.random()), rng)
            i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
            with_edge = g if g.has_edge(i, j) else toggle_edge(g, i, j)
            without = toggle_edge(with_edge, i, j)
            expected = sufficient_stats(with_edge, ALL) - sufficient_stats(without, ALL)
            got = change_stats(g, i, j, ALL)
            assert np.array_equal(got, expected)
            # the change statistic never depends on the dyad's own state
            assert np.array_equal(change_stats(with_edge, i, j, ALL), expected)

    def test_edge_change_is_one(self):
        g = Graph(5)
        assert change_stats(g, 0, 1, (EDGES,))[0] == 1


class TestEdgeListFormat:
    def test_golden_parse(self):
        text = "# comment\nn=4\n1 2\n3 4\n"
        g = parse_edge_list(text)
        assert g.n == 4
        assert g.edges() == [(0, 1), (2, 3)]

    def test_roundtrip(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            g = random_graph(int(rng.integers(2, 10)), 0.4, rng)
            assert parse_edge_list(format_edge_list(g)) == g

    def test_write_uses_one_based_ids(self):
        g = toggle_edge(Graph(3), 0, 2)
        buf = io.StringIO()
        from ergmix.graph import write_edge_list

        write_edge_list(g, buf)
        body = [ln for ln in buf.getvalue().splitlines()
                if ln and not ln.startswith("#")]
        assert body[0] == "n=3"
        assert body[1] == "1 3"

    def test_missing_header(self):
        with pytest.raises(ValueError, match="n="):
            parse_edge_list("1 2\n")

    def test_bad_token_reports_line(self):
        with pytest.raises(ValueError, match="line 3"):
            parse_edge_list("n=4\n1 2\n1 x\n")

    def test_out_of_range_id(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_edge_list("n=3\n1 4\n")

    def test_zero_id_rejected(self):
        with pytest.raises(ValueError):
            parse_edge_list("n=3\n0 2\n")

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_edge_list("n=3\n2 2\n")

    def test_duplicates_collapse(self):
        g = parse_edge_list("n=3\n1 2\n2 1\n1 2\n")
        assert g.n_edges == 1


class TestAdjacencyCsv:
    def test_golden(self):
        g = parse_adjacency_csv("0,1,0\n1,0,1\n0,1,0\n")
        assert g.edges() == [(0, 1), (1, 2)]

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            parse_adjacency_csv("0,1\n0,0\n")

    def test_diagonal_rejected(self):
        with pytest.raises(ValueError):
            parse_adjacency_csv("1,0\n0,0\n")

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            parse_adjacency_csv("0,1\n1\n")


class TestKarate:
    def test_node_and_edge_counts(self):
        g = load_karate()
        assert g.n == 34
        assert g.n_edges == 78

    def test_known_structure(self):
        g = load_karate()
        # the two club leaders are not tied to each other
        assert not g.has_edge(0, 33)
        deg = g.degrees()
        assert deg[0] == 16
        assert deg[33] == 17
        assert deg.sum() == 2 * 78

    def test_recount_from_raw_file(self):
        from importlib import resources

        raw = (resources.files("ergmix.data") / "karate.edges").read_text()
        pairs = set()
        for line in raw.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n="):
                continue
            a, b = (int(tok) for tok in line.split())
            pairs.add((min(a, b), max(a, b)))
        g = load_karate()
        assert len(pairs) == g.n_edges
        assert {(i + 1, j + 1) for i, j in g.edges()} == pairs
