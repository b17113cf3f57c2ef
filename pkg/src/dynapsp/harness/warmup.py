"""Recourse experiment for the simple layered pivot stack.

Layer 0 is a copy of the input graph.  Each layer i keeps a greedy spanner
H_i of its graph G_i, and G_(i+1) is the contracted graph of a vertex
sparsifier (one pivot per vertex) built on H_i.  Layer j and every layer
above it restart once layer j has received more than
gamma_ds^j * gamma_vs^j * 2^(depth - j) input changes since it was built;
the input of layer j > 0 is the spanner of layer j - 1.

The pivot sets A_i are the vertex sets of the G_i mapped back to input
vertices; their recourse counts the initial size plus every element that
enters or leaves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..apsp import _Mirror
from ..dyngraph import DeleteEdge, DynGraph, InsertEdge, InsertVertex, SplitVertex
from ..spanner.greedy import GreedySpanner
from ..vsparsifier import VertexSparsifier


def warmup_params(n: int) -> tuple[int, int]:
    """(k, depth) with depth = ceil(sqrt(log2 n)) and k = 2^depth."""
    depth = max(1, math.ceil(math.sqrt(math.log2(max(n, 2)))))
    return 2**depth, depth


class _SpannerView:
    """What `_Mirror` needs from a spanner: `edges()` and `edge_set`."""

    def __init__(self, sp: GreedySpanner):
        self.sp = sp
        self.edge_set = sp.edges()

    def edges(self):
        return self.edge_set


class _Layer:
    def __init__(self, stack, index: int, graph: DynGraph, vs: VertexSparsifier | None):
        self.stack = stack
        self.index = index
        self.graph = graph
        self.vs = vs
        self.received = 0
        self.spanner = GreedySpanner(graph)
        self.view = _SpannerView(self.spanner)
        self.mirror: _Mirror | None = None
        self.above: _Layer | None = None

    def attach(self, above: "_Layer | None") -> None:
        self.above = above
        if above is None:
            self.mirror = None
            return
        self.mirror = self._mirror
        self.mirror.sink = self._forward

    def make_mirror(self) -> _Mirror:
        self._mirror = _Mirror(self.graph, self.view)
        return self._mirror

    def _forward(self, up):
        ch = self._mirror.graph.apply_update(up)
        self.above.received += 1
        self.above.vs.handle(ch)
        return ch

    def receive(self, ch) -> None:
        """React to a change already applied to this layer's graph."""
        up = ch.update
        if isinstance(up, InsertVertex):
            if self.mirror is not None:
                self.mirror.vertex(ch.vertices[0])
            return
        if isinstance(up, SplitVertex):
            raise ValueError("the recourse stack takes edge-dynamic input only")
        delta = self.spanner.update(ch)
        if delta.rebuilt:
            self.view.edge_set = self.spanner.edges()
        else:
            self.view.edge_set.difference_update(delta.removed)
            self.view.edge_set.update(delta.inserted)
        if self.mirror is None:
            return
        for e in delta.removed:
            self.mirror.delete(e)
        for e in delta.inserted:
            if self.graph.has_edge(e):
                self.mirror.insert(e)

    def origin(self, x) -> int:
        """Input vertex that vertex x of this layer's graph maps back to."""
        if self.vs is None:
            return x
        below = self.stack.layers[self.index - 1]
        return below.origin(below.mirror_back[self.vs.g_of[x]])

    def vertex_set(self) -> set:
        return {self.origin(x) for x in self.graph.vertices()}


@dataclass
class RecourseReport:
    k: int
    depth: int
    gamma_ds: float
    gamma_vs: float
    graph_recourse: int
    initial_sizes: list
    recourse: list
    restarts: list
    max_last_layer: int
    updates: int = 0
    history: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.recourse)

    @property
    def ratio(self) -> float:
        return self.total / max(self.graph_recourse, 1)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "depth": self.depth,
            "gamma_ds": self.gamma_ds,
            "gamma_vs": self.gamma_vs,
            "updates": self.updates,
            "graph_recourse": self.graph_recourse,
            "initial_sizes": list(self.initial_sizes),
            "recourse": list(self.recourse),
            "restarts": list(self.restarts),
            "max_last_layer": self.max_last_layer,
            "total": self.total,
            "ratio": self.ratio,
        }


class RecourseStack:
    def __init__(self, G: DynGraph, gamma_ds: float = 8, gamma_vs: float = 8, k: int | None = None, depth: int | None = None):
        self.G = G.copy(counters=False)
        wk, wd = warmup_params(G.num_vertices())
        self.k = k or wk
        self.depth = depth or wd
        self.gamma_ds = gamma_ds
        self.gamma_vs = gamma_vs
        self.layers: list[_Layer] = []
        self.restarts = [0] * (self.depth + 1)
        self._build_from(0)

    def threshold(self, j: int) -> float:
        return self.gamma_ds**j * self.gamma_vs**j * 2 ** (self.depth - j)

    def _build_from(self, j: int) -> None:
        del self.layers[j:]
        for i in range(j, self.depth):
            if i == 0:
                layer = _Layer(self, 0, self.G, None)
            else:
                below = self.layers[i - 1]
                source = below.make_mirror()
                below.mirror_back = {c: w for w, c in source.vmap.items()}
                vs = VertexSparsifier(source.graph, self.k, f=1, epoch=10**18)
                layer = _Layer(self, i, vs.gt, vs)
                vs.listener = layer.receive
                below.attach(layer)
            self.layers.append(layer)
        self.layers[-1].attach(None)
        for layer in self.layers[j:]:
            self.restarts[layer.index] += 1

    def apply_update(self, up) -> None:
        if isinstance(up, SplitVertex):
            raise ValueError("the recourse stack takes edge-dynamic input only")
        ch = self.G.apply_update(up)
        self.layers[0].received += 1
        self.layers[0].receive(ch)
        for layer in self.layers:
            if layer.mirror is not None:
                layer.mirror_back = {c: w for w, c in layer.mirror.vmap.items()}
        for j, layer in enumerate(self.layers):
            if layer.received > self.threshold(j):
                self._build_from(j)
                break

    def pivot_sets(self) -> list[set]:
        sets = [layer.vertex_set() for layer in self.layers]
        top = sets[-1]
        sets.append({min(top)} if top else set())
        return sets


def experiment_recourse(G: DynGraph, stream, gamma_ds: float = 8, gamma_vs: float = 8, k=None, depth=None) -> RecourseReport:
    """Run the layered stack over `stream` and report per-layer pivot-set recourse."""
    stack = RecourseStack(G, gamma_ds, gamma_vs, k, depth)
    sets = stack.pivot_sets()
    initial = [len(s) for s in sets]
    recourse = list(initial)
    history = []
    count = 0
    for up in stream:
        if not isinstance(up, (InsertEdge, DeleteEdge, InsertVertex)):
            raise ValueError("the recourse stack takes edge-dynamic input only")
        stack.apply_update(up)
        count += 1
        now = stack.pivot_sets()
        for i, (a, b) in enumerate(zip(sets, now)):
            recourse[i] += len(a ^ b)
        sets = now
        history.append([len(s) for s in now])
    graph_recourse = G.num_vertices() + G.num_edges() + count
    return RecourseReport(
        k=stack.k,
        depth=stack.depth,
        gamma_ds=gamma_ds,
        gamma_vs=gamma_vs,
        graph_recourse=graph_recourse,
        initial_sizes=initial,
        recourse=recourse,
        restarts=list(stack.restarts),
        max_last_layer=max([initial[-2]] + [h[-2] for h in history]),
        updates=count,
        history=history,
    )
