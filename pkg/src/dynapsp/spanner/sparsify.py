"""Layered congestion-bounded sparsification of an embedded graph.

Given a unit-length guest graph J' whose edges are embedded into a host H,
pick J ⊆ J' together with an embedding of J' into J.  Edges are offered to
layer 0 first.  A layer takes responsibility for an edge if its uncongested
subgraph already has a short path; otherwise it adopts the edge if no host
vertex on the edge's host walk is too congested; otherwise the edge moves on
to the next layer.

All layers share one APSP structure over the disjoint union of their
uncongested subgraphs, run on a degree-3 tree expansion of that union.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from ..dyngraph import BSTReduction, DeleteEdge, DynGraph, InsertEdge, InsertVertex
from ..embedding import Embedding, Walk
from ..errors import ApspUnavailable
from ..oracle import ExactApsp

BST_DISTORTION = 1.5


@dataclass
class SparsifyConfig:
    dist_factor: float = 2.0
    econg_factor: float = 2.0
    vcong_factor: float = 32.0
    use_bst: bool = True


def exact_factory(graph, size_hint=0):
    return ExactApsp(graph)


@dataclass
class SparsifyResult:
    edges: set
    embedding: Embedding
    layer_of: dict
    layers: list
    hat_layers: list
    seen: list
    delta: int
    num_layers: int
    log_n: float
    gamma_apx: float
    threshold: float
    overflow: int = 0
    vcong_layers: list = field(default_factory=list)


class _SharedApsp:
    """Distances in the union of per-layer uncongested subgraphs."""

    def __init__(self, vertices, num_layers, factory, use_bst, size_hint):
        self.vertices = list(vertices)
        self.nv = len(self.vertices)
        # union vertices are created on first use, keyed by (layer, vertex)
        self.node_of: dict = {}
        self.union = DynGraph()
        self.key_of: dict[int, object] = {}
        self.edge_of: dict = {}
        self.use_bst = use_bst
        if use_bst:
            self.bst = BSTReduction(self.union, scale=None)
            graph = self.bst.graph
            self.scale = self.bst.scale
        else:
            self.bst = None
            graph = self.union
            self.scale = 1
        try:
            self.apsp = factory(graph, size_hint)
        except Exception as exc:  # pragma: no cover - defensive
            raise ApspUnavailable(str(exc)) from exc
        if use_bst:
            self.bst.sink = self.apsp.apply_update if hasattr(self.apsp, "apply_update") else graph.apply_update
        self.stretch = float(getattr(self.apsp, "stretch", 1.0)) * (BST_DISTORTION if use_bst else 1.0)

    def _union_vertex(self, layer, v):
        x = self.node_of.get((layer, v))
        if x is None:
            ch = self.union.apply_update(InsertVertex())
            x = self.node_of[(layer, v)] = ch.vertices[0]
            self._forward(ch)
        return x

    def _node(self, layer, v):
        uid = self.node_of.get((layer, v))
        if uid is None:
            return None
        return self.bst.root(uid) if self.bst is not None else uid

    def add(self, layer, key, u, v):
        a = self._union_vertex(layer, u)
        b = self._union_vertex(layer, v)
        ch = self.union.apply_update(InsertEdge(a, b, 1))
        self.key_of[ch.edge] = key
        self.edge_of[(layer, key)] = ch.edge
        self._forward(ch)

    def remove(self, layer, key):
        e = self.edge_of.pop((layer, key))
        del self.key_of[e]
        self._forward(self.union.apply_update(DeleteEdge(e)))

    def _forward(self, ch):
        if self.bst is not None:
            self.bst.mirror(ch)
        elif hasattr(self.apsp, "notify"):
            self.apsp.notify(ch)

    def short_path(self, layer, u, v, threshold):
        """Guest keys of a u-v path in the layer if its estimate is ≤ threshold."""
        a, b = self._node(layer, u), self._node(layer, v)
        if a is None or b is None:
            return None
        cutoff = threshold * self.scale
        if hasattr(self.apsp, "dist_path"):
            d, path = self.apsp.dist_path(a, b, cutoff=cutoff)
            if d is None or d > cutoff:
                return None
        else:
            d = self.apsp.dist(a, b, cutoff=cutoff) if _takes_cutoff(self.apsp) else self.apsp.dist(a, b)
            if d is None or d > cutoff:
                return None
            path = self.apsp.path(a, b, cutoff=cutoff) if _takes_cutoff(self.apsp) else self.apsp.path(a, b)
        if self.bst is not None:
            path = self.bst.lift_walk(path)
        return [self.key_of[e] for e in path]


def _takes_cutoff(apsp) -> bool:
    return getattr(apsp, "supports_cutoff", isinstance(apsp, ExactApsp))


def sparsify(
    guest_edges: dict,
    walks: Embedding,
    vertices=None,
    apsp_factory: Callable | None = None,
    config: SparsifyConfig | None = None,
) -> SparsifyResult:
    """Sparsify guest graph J' given as `{key: (u, v)}` with host walks.

    `walks[key]` is the host walk of guest edge `key`.  Returns the kept
    keys and an embedding of every guest edge into kept edges, stored as
    walks whose vertices are guest vertices and whose edges are keys.
    """
    cfg = config or SparsifyConfig()
    factory = apsp_factory or exact_factory
    if vertices is None:
        vs: set = set()
        for u, v in guest_edges.values():
            vs.add(u)
            vs.add(v)
        vertices = sorted(vs)
    else:
        vertices = sorted(vertices)
    nv = len(vertices)
    degree: Counter = Counter()
    for u, v in guest_edges.values():
        degree[u] += 1
        degree[v] += 1
    delta = max(walks.max_vcong(), 0) + max(degree.values(), default=0)
    num_layers = max(1, 2 * math.ceil(math.log2(max(nv * delta, 2))))
    log_n = math.log2(max(nv, 2))
    host_len = max(walks.length(), 1)
    out = Embedding()
    layers: list[set] = [set() for _ in range(num_layers + 1)]
    hat: list[set] = [set() for _ in range(num_layers + 1)]
    vcong = [Counter() for _ in range(num_layers + 1)]
    seen = [0] * (num_layers + 1)
    layer_of: dict = {}
    if not guest_edges:
        return SparsifyResult(set(), out, layer_of, layers, hat, seen, delta, num_layers, log_n, 1.0, 0.0)
    shared = _SharedApsp(vertices, num_layers, factory, cfg.use_bst, len(guest_edges))
    gamma = shared.stretch
    threshold = cfg.dist_factor * gamma * log_n
    overflow = 0
    for key in sorted(guest_edges):
        u, v = guest_edges[key]
        host_walk = walks[key]
        i = 0
        while True:
            seen[i] += 1
            path = shared.short_path(i, u, v, threshold) if hat[i] else None
            if path is not None:
                walk = _guest_walk(guest_edges, u, path)
                out.embed(key, walk)
                cap = cfg.econg_factor * gamma * delta * log_n / 2**i
                for f in set(path):
                    if f in hat[i] and out.econg[f] >= cap:
                        hat[i].discard(f)
                        shared.remove(i, f)
                layer_of[key] = i
                break
            vcap = cfg.vcong_factor * 2**i * host_len
            last = i == num_layers
            if last or all(vcong[i][x] <= vcap for x in host_walk.vertices):
                if last and not all(vcong[i][x] <= vcap for x in host_walk.vertices):
                    overflow += 1
                layers[i].add(key)
                hat[i].add(key)
                shared.add(i, key, u, v)
                vcong[i].update(host_walk.vertices)
                out.embed(key, Walk((u, v), (key,)))
                layer_of[key] = i
                break
            i += 1
    kept: set = set().union(*layers)
    return SparsifyResult(
        kept, out, layer_of, layers, hat, seen, delta, num_layers, log_n, gamma, threshold, overflow, vcong
    )


def _guest_walk(guest_edges, start, keys) -> Walk:
    verts = [start]
    x = start
    for k in keys:
        a, b = guest_edges[k]
        x = b if x == a else a
        verts.append(x)
    return Walk(tuple(verts), tuple(keys))


def sparsify_graph(J: DynGraph, host=None, walks: Embedding | None = None, **kw) -> SparsifyResult:
    """Sparsify a unit-length graph; by default embedded into itself."""
    guest = {e: J.endpoints(e) for e in J.edges()}
    if walks is None:
        walks = Embedding()
        for e, (u, v) in guest.items():
            walks.embed(e, Walk((u, v), (e,)))
    return sparsify(guest, walks, vertices=list(J.vertices()), **kw)
