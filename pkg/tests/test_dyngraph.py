from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynapsp.dyngraph import (
    BSTReduction,
    DeleteEdge,
    DynGraph,
    InsertEdge,
    InsertVertex,
    SplitSimulator,
    SplitVertex,
    bst_scale,
    format_update,
    parse_stream,
    parse_update,
    simulate_splits,
)
from dynapsp.errors import InvalidSplitSet, UnknownEdge, UnknownVertex
from dynapsp.oracle import exact_dist


def triangle():
    return DynGraph(3, [(0, 1), (1, 2), (0, 2)])


def star(d):
    return DynGraph(d + 1, [(0, i) for i in range(1, d + 1)])


def test_delete_touches_endpoints():
    g = triangle()
    ch = g.apply_update(DeleteEdge(0))
    assert ch.touched == {0, 1}
    assert g.total_updates == 1 and g.decremental_updates == 1


def test_insert_touches_nothing():
    g = triangle()
    ch = g.apply_update(InsertEdge(0, 1, 5))
    assert ch.touched == frozenset()
    assert g.total_updates == 1 and g.decremental_updates == 0
    assert g.length(ch.edge) == 5


def test_split_star_center():
    g = star(3)
    ch = g.apply_update(SplitVertex(0, {1}))
    a, b = ch.vertices
    assert g.neighbors(a) == {1}
    assert g.neighbors(b) == {2, 3}
    assert ch.touched == {a, b}
    assert not g.has_vertex(0)
    assert g.total_updates == 1 and g.decremental_updates == 1


def test_split_path_middle():
    g = DynGraph(3, [(0, 1), (1, 2)])
    a, b = g.split_vertex(1, {0})
    assert g.endpoints(0) == (0, a)
    assert g.endpoints(1) == (b, 2)


def test_split_full_side_isolates_second_copy():
    g = star(3)
    a, b = g.split_vertex(0, {1, 2, 3})
    assert g.degree(b) == 0 and g.degree(a) == 3


def test_master_chain():
    g = star(3)
    a, _ = g.split_vertex(0, {1, 2})
    c, d = g.split_vertex(a, {1})
    assert g.master(a) == {0}
    assert g.master(c) == g.master(d) == {a, 0}


def test_split_rejects_non_neighbours():
    g = DynGraph(4, [(0, 1), (1, 2)])
    with pytest.raises(InvalidSplitSet):
        g.split_vertex(1, {3})


def test_unknown_ids():
    g = triangle()
    with pytest.raises(UnknownEdge):
        g.delete_edge(9)
    with pytest.raises(UnknownVertex):
        g.insert_edge(0, 7)
    with pytest.raises(UnknownVertex):
        g.split_vertex(8)


def test_self_loops_dropped_and_lengths_checked():
    g = DynGraph(2, length_bound=4)
    assert g.add_edge(0, 0) is None
    assert g.num_edges() == 0
    with pytest.raises(ValueError):
        g.add_edge(0, 1, 5)
    with pytest.raises(ValueError):
        g.add_edge(0, 1, 0)
    with pytest.raises(TypeError):
        g.add_edge(0, 1, 1.5)


def test_ids_never_reused():
    g = triangle()
    g.delete_edge(2)
    e = g.insert_edge(0, 2)
    assert e == 3
    a, b = g.split_vertex(0, {1})
    assert (a, b) == (3, 4)


def test_stream_text_round_trip():
    text = "# header\nI 0 1 3\nD 4\nS 2 1,5\nS 7\nV\n"
    ups = parse_stream(text.splitlines())
    assert ups == [InsertEdge(0, 1, 3), DeleteEdge(4), SplitVertex(2, {1, 5}), SplitVertex(7), InsertVertex()]
    assert [format_update(u) for u in ups] == ["I 0 1 3", "D 4", "S 2 1,5", "S 7", "V"]
    assert parse_update("   ") is None
    with pytest.raises(ValueError):
        parse_update("X 1")


def test_simulate_splits_example():
    g = DynGraph(3, [(0, 1, 2), (0, 2, 3)])
    out = simulate_splits([SplitVertex(0, {1})], g)
    assert out == [InsertVertex(), DeleteEdge(0), InsertEdge(3, 1, 2)]


def test_simulate_splits_pure_insertions_unchanged():
    g = triangle()
    batch = [InsertEdge(0, 1), InsertVertex()]
    assert simulate_splits(batch, g) == batch


def test_simulate_split_degree_eight_moves_smaller_side():
    g = star(8)
    out = simulate_splits([SplitVertex(0, {1, 2, 3})], g)
    edge_ops = [u for u in out if not isinstance(u, InsertVertex)]
    assert len(edge_ops) <= 7
    assert len(edge_ops) == 6
    assert sum(isinstance(u, InsertVertex) for u in out) == 1


def _edges_under(g, vmap):
    out = []
    for e in g.edges():
        a, b = g.endpoints(e)
        out.append((min(vmap[a], vmap[b]), max(vmap[a], vmap[b]), g.length(e)))
    return sorted(out)


def _random_updates(g, rng, count):
    ups = []
    for _ in range(count):
        verts = sorted(g.vertices())
        r = rng.random()
        if r < 0.3 and g.num_edges():
            up = DeleteEdge(rng.choice(sorted(g.edges())))
        elif r < 0.6:
            u, v = rng.sample(verts, 2)
            up = InsertEdge(u, v, rng.randint(1, 5))
        elif r < 0.65:
            up = InsertVertex()
        else:
            v = rng.choice(verts)
            nb = sorted(g.neighbors(v))
            if not nb:
                up = InsertVertex()
            else:
                up = SplitVertex(v, set(rng.sample(nb, rng.randint(0, len(nb)))))
        g.apply_update(up)
        ups.append(up)
    return ups


@pytest.mark.parametrize("seed", range(5))
def test_split_simulator_isomorphic(seed):
    rng = random.Random(seed)
    g = DynGraph(30)
    for _ in range(60):
        u, v = rng.sample(range(30), 2)
        g.add_edge(u, v, rng.randint(1, 5))
    sim = SplitSimulator(g)
    scratch = g.copy()
    for up in _random_updates(scratch, rng, 150):
        sim.mirror(g.apply_update(up))
        inv = {t: s for s, t in sim.vertex_map.items()}
        live = {t for t in sim.target.vertices() if t in inv}
        assert live == set(inv)
        assert _edges_under(g, {v: v for v in g.vertices()}) == _edges_under(sim.target, inv)
    assert g.total_updates == 150
    assert sim.target.decremental_updates >= 0


def test_counters_match_stream():
    rng = random.Random(3)
    g = DynGraph(20, [(i, i + 1) for i in range(19)])
    ups = _random_updates(g, rng, 300)
    assert g.total_updates == 300
    assert g.decremental_updates == sum(isinstance(u, (DeleteEdge, SplitVertex)) for u in ups)


def test_bst_star_degrees():
    g = star(4)
    r = BSTReduction(g)
    assert r.graph.max_degree() <= 3
    assert r.leaf_count(0) == 4


def test_bst_single_edge():
    g = DynGraph(2, [(0, 1, 3)])
    r = BSTReduction(g)
    assert r.graph.num_edges() == 1
    (e,) = r.graph.edges()
    assert r.graph.length(e) == r.scale * 3
    assert all(r.graph.degree(v) == 1 for v in r.graph.vertices())


def test_bst_scale_rule():
    assert bst_scale(1) == 4
    assert bst_scale(50) == 4 * (6 + 1)


def test_bst_distance_round_trip():
    rng = random.Random(11)
    g = DynGraph(50)
    while g.num_edges() < 150:
        u, v = rng.sample(range(50), 2)
        g.add_edge(u, v, rng.randint(1, 6))
    r = BSTReduction(g)
    for _ in range(60):
        u, v = rng.sample(range(50), 2)
        d = exact_dist(g, u, v)
        if d is None:
            continue
        d2 = exact_dist(r.graph, r.root(u), r.root(v)) / r.scale
        assert d <= d2 <= 1.5 * d


def test_bst_tracks_updates_with_degree_bound():
    rng = random.Random(5)
    g = DynGraph(20)
    for _ in range(40):
        u, v = rng.sample(range(20), 2)
        g.add_edge(u, v)
    r = BSTReduction(g)
    for _ in range(200):
        if rng.random() < 0.5 and g.num_edges():
            ch = g.apply_update(DeleteEdge(rng.choice(sorted(g.edges()))))
        else:
            u, v = rng.sample(range(20), 2)
            ch = g.apply_update(InsertEdge(u, v, rng.randint(1, 4)))
        r.mirror(ch)
        assert r.graph.max_degree() <= 3
        assert len(r.edge_map) == g.num_edges()
    for _ in range(30):
        u, v = rng.sample(range(20), 2)
        d = exact_dist(g, u, v)
        d2 = exact_dist(r.graph, r.root(u), r.root(v))
        assert (d is None) == (d2 is None)
        if d is not None:
            assert d <= d2 / r.scale <= 1.5 * d


def test_bst_lift_walk():
    g = DynGraph(4, [(0, 1, 2), (1, 2, 2), (1, 3, 1)])
    r = BSTReduction(g)
    from dynapsp.oracle import exact_path

    p = exact_path(r.graph, r.root(0), r.root(2))
    assert r.lift_walk(p) == [0, 1]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(1, 9)), max_size=25))
def test_recourse_counters_monotone(edges):
    g = DynGraph(8)
    last = (0, 0)
    for u, v, w in edges:
        ch = g.apply_update(InsertEdge(u, v, w))
        if ch.edge is not None and w % 3 == 0:
            g.apply_update(DeleteEdge(ch.edge))
        now = (g.total_updates, g.decremental_updates)
        assert now[0] >= last[0] and now[1] >= last[1]
        last = now
    assert all(1 <= g.length(e) for e in g.edges())
