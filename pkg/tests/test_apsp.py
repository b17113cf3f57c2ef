from __future__ import annotations

import math
import random

import numpy as np
import pytest

from dynapsp.apsp import DynamicApsp, choose_params, potential
from dynapsp.dyngraph import DeleteEdge, DynGraph, InsertEdge, SplitVertex
from dynapsp.errors import Disconnected, UnknownVertex
from dynapsp.harness.verify import full_check
from dynapsp.oracle import distance_matrix, exact_dist, replay_walk


def random_graph(n, m, seed, maxlen=4):
    rng = random.Random(seed)
    g = DynGraph(n, [(i, i + 1, rng.randint(1, maxlen)) for i in range(n - 1)])
    while g.num_edges() < m:
        u, v = rng.sample(range(n), 2)
        g.add_edge(u, v, rng.randint(1, maxlen))
    return g


def small_hierarchy(g, **kw):
    opts = dict(k=4, f=1, base_threshold=16)
    opts.update(kw)
    return DynamicApsp(g, use_bst=False, **opts)


def random_update(g, rng):
    verts = sorted(g.vertices())
    r = rng.random()
    if r < 0.4 and g.num_edges():
        return DeleteEdge(rng.choice(sorted(g.edges())))
    if r < 0.8:
        u, v = rng.sample(verts, 2)
        return InsertEdge(u, v, rng.randint(1, 4))
    v = rng.choice(verts)
    nb = sorted(g.neighbors(v))
    return SplitVertex(v, set(nb[: len(nb) // 2]))


def test_choose_params_formula():
    p = choose_params(2**16)
    assert p.k == round(2 ** (16 / 4**0.25)) == 2545
    assert p.K == 3
    assert p.Lambda == math.ceil(16 / math.log2(2545))
    assert p.gamma_dc == math.ceil(4 * p.gamma_vs * p.gamma_es)


def test_choose_params_small_m_clamps():
    p = choose_params(16)
    assert p.k >= 2 and p.K >= 1
    assert p.K <= math.ceil(math.log2(16) ** (1 / 3))


def test_choose_params_k_monotone():
    ks = [choose_params(2**e).k for e in range(8, 21)]
    assert ks == sorted(ks)


def test_choose_params_overrides():
    p = choose_params(4096, k=8, f=1)
    assert p.k == 8 and p.f == 1 and p.base_threshold == 64
    assert p.Lambda == math.ceil(math.log(4096) / math.log(8))


def test_potential_formula():
    g = DynGraph(9, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (0, 5), (1, 6), (1, 7), (1, 8)])
    assert [g.degree(v) for v in (0, 1, 2)] == [5, 5, 2]
    assert potential(g, [0, 1, 2], 4) == 2


def test_small_graph_is_single_exact_level():
    g = random_graph(10, 20, 1)
    ap = DynamicApsp(g, use_bst=False)
    assert len(ap.levels()) == 1 and ap.root.base
    assert ap.dist(0, 0) == 0
    for u in range(10):
        for v in range(10):
            assert ap.dist(u, v) == pytest.approx(exact_dist(g, u, v))


def test_hierarchy_levels_shrink():
    g = random_graph(64, 160, 2)
    ap = small_hierarchy(g)
    sizes = ap.root.level_sizes()
    assert len(sizes) >= 2
    assert all(b[0] <= a[0] for a, b in zip(sizes, sizes[1:]))
    assert ap.check_invariants() == []


def test_self_distance_and_unknown_vertex():
    g = random_graph(64, 160, 3)
    ap = small_hierarchy(g)
    assert ap.dist(5, 5) == 0
    with pytest.raises(UnknownVertex):
        ap.dist(0, 1000)


def test_disconnected_pairs():
    g = random_graph(40, 100, 4)
    g.add_vertex()
    ap = small_hierarchy(g)
    assert ap.dist(0, 40) is None
    with pytest.raises(Disconnected):
        ap.path(0, 40)


def test_dist_matrix_matches_pairwise_queries():
    g = random_graph(64, 160, 5)
    ap = small_hierarchy(g)
    verts, mat = ap.dist_matrix()
    for i in range(0, 64, 7):
        for j in range(0, 64, 5):
            d = ap.dist(verts[i], verts[j])
            assert mat[i, j] == pytest.approx(d)


def test_estimates_sound_and_cluster_pairs_exact():
    g = random_graph(64, 160, 6)
    ap = small_hierarchy(g)
    verts, est = ap.dist_matrix()
    index, exact = distance_matrix(g, sources=verts)
    exact = exact[:, [index[x] for x in verts]]
    assert np.all(est >= exact - 1e-9)
    root = ap.root
    for u in verts:
        rec = root.vs.records[u]
        for v in rec.cluster():
            assert ap.dist(u, v) == exact_dist(g, u, v)


def test_paths_replay_within_estimate():
    g = random_graph(64, 160, 7)
    ap = small_hierarchy(g)
    rng = random.Random(7)
    for _ in range(40):
        u, v = rng.sample(range(64), 2)
        d = ap.dist(u, v)
        p = ap.path(u, v)
        assert replay_walk(g, u, p) == v
        assert sum(g.length(e) for e in p) <= d + 1e-9


def test_soundness_across_rebuilds_with_splits():
    g = random_graph(48, 120, 8)
    ap = small_hierarchy(g)
    rng = random.Random(8)
    for step in range(60):
        ap.apply_update(random_update(g, rng))
        if step % 6 == 5:
            verts = sorted(g.vertices())
            report = full_check(ap, pairs=[(verts[0], verts[-1]), (verts[1], verts[-2])])
            assert report.ok, report.violations
    assert ap.root.stats.builds >= 2


def test_bst_front_end_sound():
    g = random_graph(40, 100, 9)
    ap = DynamicApsp(g, k=4, f=1, base_threshold=16)
    rng = random.Random(9)
    for _ in range(20):
        ap.apply_update(random_update(g, rng))
    verts = sorted(g.vertices())
    report = full_check(ap, pairs=[(verts[0], verts[-1]), (verts[3], verts[17])])
    assert report.ok, report.violations
