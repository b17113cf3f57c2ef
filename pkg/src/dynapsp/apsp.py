"""Recursive dynamic APSP hierarchy.

Each level keeps pivots and certified clusters of its input graph, a
contracted graph over the pivots, a spanner H of that contracted graph and a
child level over a copy of H.  Distances inside a cluster are exact; other
pairs go through the pivots and the child:

    dist(u, p(u)) + child.dist(p(u), p(v)) + dist(p(v), v)

Levels only see edge-dynamic updates.  The user-facing `DynamicApsp`
simulates vertex splits and optionally reduces the graph to degree 3 first.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dyngraph import (
    BSTReduction,
    Change,
    DeleteEdge,
    DynGraph,
    InsertEdge,
    InsertVertex,
    SplitSimulator,
    SplitVertex,
)
from .errors import DegreeLoopStalled, Disconnected, UnknownVertex
from .oracle import ExactApsp, distance_matrix
from .spanner.sparsify import SparsifyConfig
from .spanner.weighted import WeightedSpanner
from .vsparsifier import VertexSparsifier


@dataclass
class Constants:
    m: int
    k: int
    K: int
    Lambda: int
    f: int = 4
    tau: int | None = None
    gamma_vs: float = 2.0
    gamma_es: float = 2.0
    gamma_dc: int = 16
    base_threshold: int = 64
    stall_window: int = 64
    min_epoch: int = 1
    bootstrap: bool = False
    simple: bool = True
    hierarchy_stretch: float = 4.0

    def as_dict(self) -> dict:
        return asdict(self)


def _loglog(m: float) -> float:
    return math.log2(max(math.log2(max(m, 4)), 2))


def choose_params(m: int, **overrides) -> Constants:
    """Parameter schedule for an m-edge input; any field may be overridden."""
    m = max(int(m), 4)
    ll = _loglog(m)
    k = max(2, round(m ** (1.0 / ll**0.25)))
    K = max(1, round(ll**0.75))
    K = min(K, max(1, math.ceil(math.log2(m) ** (1.0 / 3.0))))
    gamma_vs = overrides.get("gamma_vs", 2.0)
    gamma_es = overrides.get("gamma_es", 2.0)
    k = int(overrides.get("k", k))
    lam = max(1, math.ceil(math.log(m) / math.log(max(k, 2))))
    c = Constants(
        m=m,
        k=k,
        K=K,
        Lambda=lam,
        gamma_vs=gamma_vs,
        gamma_es=gamma_es,
        gamma_dc=math.ceil(4 * gamma_vs * gamma_es),
        base_threshold=max(k, 64),
    )
    rest = {key: val for key, val in overrides.items() if key not in ("k", "gamma_vs", "gamma_es")}
    if "k" in overrides and "base_threshold" not in rest:
        rest["base_threshold"] = max(k, 64)
    if "k" in overrides and "Lambda" not in rest:
        rest["Lambda"] = lam
    return replace(c, **rest)


def potential(H, vertices, cap) -> int:
    """Sum of max(deg_H(v) - cap, 0)."""
    return sum(max(H.degree(v) - cap, 0) for v in vertices)


class _Mirror:
    """Edge-dynamic copy of a spanner H over the contracted graph."""

    def __init__(self, gt: DynGraph, H):
        self.gt = gt
        self.H = H
        self.graph = DynGraph()
        self.vmap: dict[int, int] = {}
        self.emap: dict[int, int] = {}
        self.rev: dict[int, int] = {}
        for w in sorted(gt.vertices()):
            self.vmap[w] = self.graph.add_vertex()
        for e in sorted(H.edges()):
            x, y = gt.endpoints(e)
            c = self.graph.add_edge(self.vmap[x], self.vmap[y], gt.length(e))
            self.emap[e] = c
            self.rev[c] = e
        self.sink = self.graph.apply_update
        self.forwarded = 0

    def _send(self, up) -> Change:
        self.forwarded += 1
        return self.sink(up)

    def vertex(self, w) -> None:
        self.vmap[w] = self._send(InsertVertex()).vertices[0]

    def split(self, ch: Change) -> None:
        a, b = ch.vertices
        in_h = self.H.edge_set
        moved = [e for e in ch.moved if e in in_h]
        kept = [e for e in ch.kept if e in in_h]
        c = self.vmap.pop(ch.removed)
        if len(moved) <= len(kept):
            leaving, fresh, stay = moved, a, b
        else:
            leaving, fresh, stay = kept, b, a
        self.vmap[stay] = c
        w = self._send(InsertVertex()).vertices[0]
        self.vmap[fresh] = w
        for e in sorted(leaving):
            self.delete(e)
            self.insert(e)

    def insert(self, e) -> None:
        x, y = self.gt.endpoints(e)
        ch = self._send(InsertEdge(self.vmap[x], self.vmap[y], self.gt.length(e)))
        self.emap[e] = ch.edge
        self.rev[ch.edge] = e

    def delete(self, e) -> None:
        c = self.emap.pop(e, None)
        if c is None:
            return
        del self.rev[c]
        self._send(DeleteEdge(c))


@dataclass
class LevelStats:
    builds: int = 0
    updates: int = 0
    degree_iterations: int = 0
    splits: int = 0
    forwarded: int = 0
    stalls: int = 0
    max_h_degree: int = 0
    potential_log: list = field(default_factory=list)


class ApspLevel:
    """One level of the hierarchy over an edge-dynamic graph `G`.

    The level owns `G`: feed updates through `apply_update`.
    """

    supports_cutoff = True

    def __init__(self, G: DynGraph, params: Constants, depth: int = 0, sparsify_config: SparsifyConfig | None = None):
        self.G = G
        self.params = params
        self.depth = depth
        self.sparsify_config = sparsify_config
        self.stats = LevelStats()
        self.child: ApspLevel | None = None
        self.deferred = False
        self._queue: list = []
        self._build()

    # -- construction ----------------------------------------------------------

    @property
    def stretch(self) -> float:
        return 1.0 if self.base else self.params.hierarchy_stretch

    def _build(self) -> None:
        p = self.params
        self.stats.builds += 1
        self.updates = 0
        m = self.G.num_edges()
        self.m = m
        self.base = m <= p.base_threshold or self.depth >= p.Lambda
        self.child = None
        if self.base:
            self.exact = ExactApsp(self.G)
            self.vs = None
            return
        self.exact = None
        self.delta = max(self.G.max_degree(), 1)
        epoch = max(math.ceil(m / p.k), p.min_epoch)
        self.vs = VertexSparsifier(self.G, p.k, f=p.f, tau=p.tau, epoch=epoch, simple=p.simple)
        factory = self._bootstrap_factory if p.bootstrap else None
        self.spanner = WeightedSpanner(self.vs.gt, p.K, apsp_factory=factory, config=self.sparsify_config)
        self.H = self.spanner.H
        self._mirror = None
        self._pending: list = []
        self.vs.listener = self._on_contracted
        self._degree_loop(set(self.vs.gt.vertices()))
        self._mirror = _Mirror(self.vs.gt, self.H)
        self.child = ApspLevel(self._mirror.graph, p, self.depth + 1, self.sparsify_config)
        self.child.deferred = True
        self._mirror.sink = self.child.apply_update

    def _bootstrap_factory(self, graph, size_hint=0):
        return ApspLevel(graph, self.params, self.depth + 1, self.sparsify_config)

    def rebuild(self) -> None:
        self._build()

    # -- maintenance -------------------------------------------------------------

    def apply_update(self, up) -> Change:
        """Apply `up` to `G`; maintenance runs now unless the level is deferred."""
        ch = self.G.apply_update(up)
        self._queue.append(ch)
        if not self.deferred:
            self.commit()
        return ch

    def maintain(self, ch: Change) -> None:
        """React to a change already applied to `G`."""
        self._queue.append(ch)
        self.commit()

    def commit(self) -> None:
        """Process every queued change as one step."""
        queue, self._queue = self._queue, []
        if not queue:
            return
        self.stats.updates += len(queue)
        self.updates += len(queue)
        p = self.params
        if self.base:
            if self.depth < p.Lambda and self.G.num_edges() > 2 * p.base_threshold:
                self._build()
            return
        if self.vs.updates + len(queue) > self.vs.epoch:
            self._build()
            return
        cand: set = set()
        self.vs.handle_batch(queue)
        self._flush(cand)
        self._degree_loop(cand)
        self.child.commit()

    def _on_contracted(self, ch: Change) -> None:
        # structural changes reach the child at once; edge changes wait for the spanner
        up = ch.update
        mirror = self._mirror
        if mirror is not None:
            if isinstance(up, InsertVertex):
                mirror.vertex(ch.vertices[0])
            elif isinstance(up, SplitVertex):
                mirror.split(ch)
        self._pending.append(ch)

    def _flush(self, cand: set) -> None:
        batch, self._pending = self._pending, []
        if not batch:
            return
        for ch in batch:
            if isinstance(ch.update, SplitVertex):
                cand.update(ch.vertices)
        delta = self.spanner.update_batch(batch)
        mirror = self._mirror
        gt = self.vs.gt
        for e in delta.removed:
            if mirror is not None:
                mirror.delete(e)
        for e in delta.inserted:
            if mirror is not None:
                mirror.insert(e)
            cand.update(gt.endpoints(e))

    def degree_cap(self) -> int:
        return 8 * self.params.gamma_dc * self.delta

    def _degree_loop(self, cand: set) -> None:
        p = self.params
        gt = self.vs.gt
        H = self.H
        guard = self.degree_cap()
        history: list[int] = []
        cand = set(cand)
        while True:
            heavy = None
            for w in sorted(cand):
                if gt.has_vertex(w) and H.degree(w) > guard:
                    heavy = w
                    break
            if heavy is None:
                break
            phi = potential(H, gt.vertices(), p.gamma_dc * self.delta)
            history.append(phi)
            self.stats.potential_log.append(phi)
            W = p.stall_window
            if len(history) > W and history[-1] >= history[-1 - W]:
                self.stats.stalls += 1
                raise DegreeLoopStalled(f"potential {phi} did not drop over {W} iterations at depth {self.depth}")
            self.stats.degree_iterations += 1
            edges = [e for e in gt.incident(heavy) if e in H.edge_set]
            log = self.vs.reduce_degree(edges, p.gamma_dc, self.delta)
            self.stats.splits += sum(1 for c in log if isinstance(c.update, SplitVertex))
            self._flush(cand)
            cand = {w for w in cand if gt.has_vertex(w)}
        self.stats.max_h_degree = max(self.stats.max_h_degree, self.max_h_degree())

    def max_h_degree(self) -> int:
        if self.base:
            return 0
        return max((self.H.degree(w) for w in self.vs.gt.vertices()), default=0)

    # -- queries -----------------------------------------------------------------

    def _check(self, u) -> None:
        if self._queue:
            self.commit()
        if not self.G.has_vertex(u):
            raise UnknownVertex(u)

    def image(self, a) -> int:
        """Child vertex holding pivot a."""
        return self._mirror.vmap[self.vs.tilde_of[a]]

    def descend(self, u, v):
        """(estimate, number of levels visited); estimate None if disconnected."""
        self._check(u)
        self._check(v)
        if self.base:
            return self.exact.dist(u, v), 1
        ru = self.vs.records[u]
        if ru.certified(v):
            return ru.dist[v], 1
        rv = self.vs.records[v]
        if rv.certified(u):
            return rv.dist[u], 1
        d, depth = self.child.descend(self.image(ru.pivot), self.image(rv.pivot))
        if d is None:
            return None, depth + 1
        return ru.radius + d + rv.radius, depth + 1

    def dist(self, u, v, cutoff=None):
        return self.descend(u, v)[0]

    def path(self, u, v, cutoff=None) -> list[int]:
        self._check(u)
        self._check(v)
        if self.base:
            return self.exact.path(u, v)
        ru = self.vs.records[u]
        if ru.certified(v):
            return ru.path_to(v)
        rv = self.vs.records[v]
        if rv.certified(u):
            return rv.path_to(u)[::-1]
        a, b = ru.pivot, rv.pivot
        middle: list[int] = []
        if a != b:
            child_path = self.child.path(self.image(a), self.image(b))
            gt_path = [self._mirror.rev[c] for c in child_path]
            middle = self.vs.map_back_path(gt_path, self.vs.tilde_of[a])
        return ru.path_to(a) + middle + rv.path_to(b)[::-1]

    def dist_matrix(self, nodes) -> np.ndarray:
        """Estimates for all pairs of `nodes` (inf when disconnected)."""
        nodes = list(nodes)
        for x in nodes:
            self._check(x)
        if self.base:
            index, mat = distance_matrix(self.G, sources=nodes)
            cols = [index[x] for x in nodes]
            return mat[:, cols]
        recs = [self.vs.records[x] for x in nodes]
        pivots = sorted({r.pivot for r in recs})
        pos = {a: i for i, a in enumerate(pivots)}
        inner = self.child.dist_matrix([self.image(a) for a in pivots])
        pi = np.array([pos[r.pivot] for r in recs], dtype=int)
        radius = np.array([r.radius for r in recs], dtype=float)
        est = radius[:, None] + inner[np.ix_(pi, pi)] + radius[None, :]
        where = {x: i for i, x in enumerate(nodes)}
        for i, r in enumerate(recs):
            for x, d in r.dist.items():
                j = where.get(x)
                if j is not None and (d < r.radius or x == r.pivot):
                    est[i, j] = d
                    est[j, i] = d
        return est

    # -- inspection ----------------------------------------------------------------

    def levels(self) -> list["ApspLevel"]:
        out = [self]
        if self.child is not None:
            out.extend(self.child.levels())
        return out

    def level_sizes(self) -> list[tuple[int, int]]:
        return [(lv.G.num_vertices(), lv.G.num_edges()) for lv in self.levels()]

    def re_bound(self) -> float:
        p = self.params
        return 6 * p.gamma_es * p.gamma_vs * (self.m / p.k + self.vs.updates)

    def check_invariants(self) -> list[str]:
        """Names of violated level invariants (degree guard, R_E, R_V budgets)."""
        bad = []
        for lv in self.levels():
            if lv.base:
                continue
            p = lv.params
            if lv.max_h_degree() > lv.degree_cap():
                bad.append(f"degree-guard@{lv.depth}")
            if lv.vs.R_E > lv.re_bound():
                bad.append(f"reduce-degree-edges@{lv.depth}")
            if lv.vs.R_V > p.gamma_vs * lv.vs.R_E / p.gamma_dc:
                bad.append(f"reduce-degree-splits@{lv.depth}")
        return bad


class DynamicApsp:
    """Fully-dynamic approximate APSP over a graph with vertex splits.

    Splits are simulated by edge moves, then (by default) the graph is
    reduced to maximum degree 3, scaling lengths by `scale`; estimates are
    divided back by `scale`.
    """

    def __init__(self, G: DynGraph, params: Constants | None = None, use_bst: bool = True, sparsify_config=None, **overrides):
        self.G = G
        self.params = params or choose_params(max(G.num_edges(), 4), **overrides)
        self.sim = SplitSimulator(G)
        self.G0 = self.sim.target
        if use_bst:
            self.bst = BSTReduction(self.G0)
            graph = self.bst.graph
            self.scale = self.bst.scale
        else:
            self.bst = None
            graph = self.G0
            self.scale = 1
        self.root = ApspLevel(graph, self.params, 0, sparsify_config)
        self.root.deferred = True
        if self.bst is not None:
            self.bst.sink = self.root.apply_update
        else:
            self.sim.sink = self.root.apply_update

    def apply_update(self, up) -> Change:
        ch = self.G.apply_update(up)
        for c in self.sim.mirror(ch):
            if self.bst is not None:
                self.bst.mirror(c)
        self.root.commit()
        return ch

    def node(self, u) -> int:
        if not self.G.has_vertex(u):
            raise UnknownVertex(u)
        x = self.sim.vertex_map[u]
        return self.bst.root(x) if self.bst is not None else x

    def _scaled(self, d):
        if d is None:
            return None
        return d if self.scale == 1 else d / self.scale

    def dist(self, u, v):
        return self._scaled(self.root.dist(self.node(u), self.node(v)))

    def descend(self, u, v):
        d, depth = self.root.descend(self.node(u), self.node(v))
        return self._scaled(d), depth

    def path(self, u, v) -> list[int]:
        a, b = self.node(u), self.node(v)
        if self.root.dist(a, b) is None:
            raise Disconnected(f"{u} and {v} are not connected")
        edges = self.root.path(a, b)
        if self.bst is not None:
            edges = self.bst.lift_walk(edges)
        inv = {t: s for s, t in self.sim.edge_map.items()}
        return [inv[e] for e in edges]

    def query(self, u, v):
        """(estimate, path) for a connected pair."""
        return self.dist(u, v), self.path(u, v)

    def dist_matrix(self, vertices=None):
        """(vertex list, estimate matrix) over user vertices."""
        verts = sorted(self.G.vertices()) if vertices is None else list(vertices)
        mat = self.root.dist_matrix([self.node(u) for u in verts])
        return verts, mat / self.scale if self.scale != 1 else mat

    def levels(self) -> list[ApspLevel]:
        return self.root.levels()

    def check_invariants(self) -> list[str]:
        return self.root.check_invariants()
