import io
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ganc.agglomerate import MergeState, build_dendrogram, flat_partition, merge_gain
from ganc.graph import GraphError, from_edges
from ganc.metrics import Partition, jaccard_index, nassoc, ncut
from ganc.testkit import naive_dendrogram, random_connected_graph, ring_of_cliques, two_chains

from helpers import nassoc_oracle, path, random_graphs


def test_initial_gains_small_graphs(triangle):
    k2 = from_edges(2, [(0, 1, 1.0)])
    st_ = MergeState.initial_delta(k2)
    assert st_.gain(0, 1) == 1.0
    st_ = MergeState.initial_delta(triangle)
    assert [g for _, _, g in st_.live_entries()] == [0.5, 0.5, 0.5]
    st_ = MergeState.initial_delta(path(3))
    assert st_.gain(0, 1) == pytest.approx(2 / 3, abs=1e-15)


def test_triangle_second_merge(triangle):
    st_ = MergeState.initial_delta(triangle)
    rec = st_.merge_step()
    assert (rec.cluster_a, rec.cluster_b, rec.new_id) == (0, 1, 3)
    # {0,1} has w=2, d=4; node 2 has w=0, d=2; they share weight 2
    assert st_.gain(2, 3) == pytest.approx(0.5, abs=1e-15)


def test_chain_pairs_merge_gain_is_negative(chain4):
    g = chain4
    p = Partition.from_labels(g, [0, 0, 1, 1])
    w, d = p.cluster_internal, p.cluster_degree
    assert merge_gain(w[0], d[0], w[1], d[1], 1.0) == pytest.approx(-1 / 3, abs=1e-15)


def test_three_chain_series():
    d = build_dendrogram(path(3))
    assert d.nassoc_series[1:].tolist() == pytest.approx([1.0, 2 / 3, 0.0], abs=1e-15)
    assert (int(d.merge_a[0]), int(d.merge_b[0])) == (0, 1)
    assert d.height == 2


def test_two_node_series():
    d = build_dendrogram(from_edges(2, [(0, 1, 1.0)]))
    assert d.nassoc_series[1:].tolist() == [1.0, 0.0]
    assert len(d) == 1


def test_ring_series_and_cut():
    g, truth = ring_of_cliques(24, 5)
    d = build_dendrogram(g)
    assert d.nassoc_at(24) == pytest.approx(240 / 11, abs=1e-9)
    p = flat_partition(g, d, 24)
    assert p.k == 24
    assert jaccard_index(p, truth.labels) == 1.0


def test_flat_partition_extremes():
    g = path(6)
    d = build_dendrogram(g)
    assert flat_partition(g, d, 6).assignment.tolist() == list(range(6))
    assert flat_partition(g, d, 1).assignment.tolist() == [0] * 6
    with pytest.raises(ValueError):
        d.labels_at(0)
    with pytest.raises(GraphError):
        flat_partition(path(5), d, 2)


def test_disconnected_graph_rejected():
    g, _ = two_chains()
    with pytest.raises(GraphError, match="largest connected component"):
        build_dendrogram(g)


def test_series_matches_recomputation_and_identity():
    for g in random_graphs(25, 3, 40, seed=1, weights="float"):
        d = build_dendrogram(g)
        for k in range(1, g.node_count + 1):
            p = flat_partition(g, d, k)
            assert p.k == k
            na = nassoc(g, p)
            assert abs(d.nassoc_series[k] - na) <= 1e-6
            assert abs(na + ncut(g, p) - k) <= 1e-9


def test_series_exact_against_rational_oracle():
    for g in random_graphs(10, 3, 12, seed=4, weights="int"):
        d = build_dendrogram(g)
        edges = list(g.edges())
        for k in range(1, g.node_count + 1):
            exact = nassoc_oracle(edges, d.labels_at(k))
            assert abs(d.nassoc_series[k] - float(exact)) <= 1e-12


def test_every_merge_is_greedy_optimal():
    for g in random_graphs(20, 3, 30, seed=2, weights="float"):
        st_ = MergeState.initial_delta(g)
        while st_.cluster_count > 1:
            live = list(st_.live_entries())
            best = max(gain for _, _, gain in live)
            # every live entry agrees with a fresh recomputation
            for a, b, gain in live:
                assert gain == pytest.approx(st_.gain(a, b), abs=1e-12)
            rec = st_.merge_step()
            assert rec.delta_gain == best


def test_heap_matches_naive_reference():
    rng = np.random.default_rng(9)
    for _ in range(30):
        n = int(rng.integers(2, 65))
        g = random_connected_graph(n, 0.15, rng, weights="int")
        fast, slow = build_dendrogram(g), naive_dendrogram(g)
        np.testing.assert_array_equal(fast.merge_a, slow.merge_a)
        np.testing.assert_array_equal(fast.merge_b, slow.merge_b)
        np.testing.assert_allclose(fast.nassoc_series[1:], slow.nassoc_series[1:], atol=1e-9)


def test_stored_delta_matches_series_steps():
    for g in random_graphs(15, 3, 40, seed=6, weights="float"):
        d = build_dendrogram(g)
        n = g.node_count
        for i, rec in enumerate(d.merges()):
            before = nassoc(g, flat_partition(g, d, n - i))
            after = nassoc(g, flat_partition(g, d, n - i - 1))
            assert rec.delta_gain == pytest.approx(after - before, abs=1e-9)


def test_scale_equivariance():
    for g in random_graphs(10, 4, 30, seed=12, weights="int"):
        d = build_dendrogram(g)
        for c in (0.5, 4.0, 1024.0):
            ds = build_dendrogram(g.scaled(c))
            np.testing.assert_array_equal(d.merge_a, ds.merge_a)
            np.testing.assert_array_equal(d.merge_b, ds.merge_b)
            np.testing.assert_array_equal(d.nassoc_series[1:], ds.nassoc_series[1:])


def test_dump_format():
    d = build_dendrogram(path(3))
    buf = io.StringIO()
    d.write(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "2 0 1 3 0.666666666667 0.666666666667"
    assert lines[1].split()[:4] == ["1", "2", "3", "4"]
    buf = io.StringIO()
    d.write_series(buf)
    assert buf.getvalue() == "k,nassoc\n3,0\n2,0.666666666667\n1,1\n"


def test_self_loops_enter_initial_series():
    g = from_edges(3, [(0, 0, 2.0), (0, 1, 1.0), (1, 2, 1.0)])
    d = build_dendrogram(g)
    assert d.nassoc_series[3] == pytest.approx(2 / 3)
    assert d.nassoc_series[1] == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.6), st.integers(0, 2**31))
def test_levels_are_nested(n, p, seed):
    g = random_connected_graph(n, p, np.random.default_rng(seed), weights="float")
    d = build_dendrogram(g)
    assert 1 <= d.height <= n - 1
    prev = d.labels_at(n)
    for k in range(n - 1, 0, -1):
        cur = d.labels_at(k)
        # each finer cluster sits inside exactly one coarser cluster
        assert len({(a, b) for a, b in zip(prev, cur)}) == k + 1
        assert len(set(cur.tolist())) == k
        prev = cur
