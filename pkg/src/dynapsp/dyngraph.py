"""Dynamic multigraph with vertex splits, recourse counters and degree reduction.

Vertex and edge ids are integers handed out by a per-graph counter and never
reused.  A vertex split removes the split vertex and allocates two fresh ids;
edges keep their ids and only have one endpoint rewritten.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral
from typing import Callable, Iterable

from .errors import InvalidSplitSet, UnknownEdge, UnknownVertex

_SATURATE = 2**63 - 1


@dataclass(frozen=True)
class InsertEdge:
    u: int
    v: int
    length: int = 1


@dataclass(frozen=True)
class DeleteEdge:
    edge: int


@dataclass(frozen=True)
class SplitVertex:
    """Split `vertex`; neighbours in `side` go to the first new vertex.

    `edges` is the multigraph form: when given, exactly those incident edge
    ids go to the first new vertex and `side` is ignored.
    """

    vertex: int
    side: frozenset = frozenset()
    edges: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "side", frozenset(self.side))
        if self.edges is not None:
            object.__setattr__(self, "edges", frozenset(self.edges))


@dataclass(frozen=True)
class InsertVertex:
    pass


Update = InsertEdge | DeleteEdge | SplitVertex | InsertVertex


@dataclass(frozen=True)
class Change:
    """Record of one applied update.

    For a split, `vertices` is (v', v''), `moved` the edges now at v' and
    `kept` the edges now at v''.
    """

    update: Update
    touched: frozenset = frozenset()
    edge: int | None = None
    endpoints: tuple = ()
    length: int | None = None
    vertices: tuple = ()
    removed: int | None = None
    moved: frozenset = frozenset()
    kept: frozenset = frozenset()

    @property
    def decremental(self) -> bool:
        return isinstance(self.update, (DeleteEdge, SplitVertex))


class DynGraph:
    """Undirected multigraph with positive integer lengths.

    `add_vertex`/`add_edge` build the initial graph and are not counted as
    updates.  `apply_update` and the `insert_*`/`delete_edge`/`split_vertex`
    wrappers are counted towards the recourse counters.
    """

    def __init__(self, n: int = 0, edges: Iterable = (), length_bound: int | None = None):
        self._adj: dict[int, dict[int, int]] = {}
        self._ends: dict[int, tuple[int, int]] = {}
        self._len: dict[int, int] = {}
        self._master: dict[int, frozenset] = {}
        self.length_bound = length_bound
        self._next_vertex = 0
        self._next_edge = 0
        self._clock = 0
        self._total = 0
        self._decremental = 0
        for _ in range(n):
            self.add_vertex()
        for u, v, *rest in edges:
            self.add_edge(u, v, rest[0] if rest else 1)

    # -- queries -----------------------------------------------------------

    def vertices(self):
        return self._adj.keys()

    def edges(self):
        return self._ends.keys()

    def num_vertices(self) -> int:
        return len(self._adj)

    def num_edges(self) -> int:
        return len(self._ends)

    def has_vertex(self, v) -> bool:
        return v in self._adj

    def has_edge(self, e) -> bool:
        return e in self._ends

    def endpoints(self, e) -> tuple[int, int]:
        try:
            return self._ends[e]
        except KeyError:
            raise UnknownEdge(e) from None

    def length(self, e) -> int:
        try:
            return self._len[e]
        except KeyError:
            raise UnknownEdge(e) from None

    def other(self, e, x) -> int:
        u, v = self.endpoints(e)
        if x == u:
            return v
        if x == v:
            return u
        raise ValueError(f"vertex {x} is not an endpoint of edge {e}")

    def adjacency(self, v) -> dict[int, int]:
        """Incident edge id -> opposite endpoint.  Do not mutate."""
        try:
            return self._adj[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def incident(self, v):
        return self.adjacency(v).keys()

    def neighbors(self, v) -> set[int]:
        return set(self.adjacency(v).values())

    def degree(self, v) -> int:
        return len(self.adjacency(v))

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj.values()), default=0)

    def master(self, v) -> frozenset:
        return self._master[v]

    @property
    def next_vertex_id(self) -> int:
        return self._next_vertex

    @property
    def next_edge_id(self) -> int:
        return self._next_edge

    @property
    def clock(self) -> int:
        return self._clock

    @property
    def total_updates(self) -> int:
        """Recourse of the graph: every applied update counts once."""
        return self._total

    @property
    def decremental_updates(self) -> int:
        """Deletions plus vertex splits."""
        return self._decremental

    # -- construction ------------------------------------------------------

    def add_vertex(self) -> int:
        v = self._next_vertex
        self._next_vertex += 1
        self._adj[v] = {}
        self._master[v] = frozenset((v,))
        return v

    def add_edge(self, u, v, length=1) -> int | None:
        """Add an edge; self-loops are dropped and get no id."""
        if u not in self._adj:
            raise UnknownVertex(u)
        if v not in self._adj:
            raise UnknownVertex(v)
        length = self._check_length(length)
        if u == v:
            return None
        e = self._next_edge
        self._next_edge += 1
        self._ends[e] = (u, v)
        self._len[e] = length
        self._adj[u][e] = v
        self._adj[v][e] = u
        return e

    def _check_length(self, length) -> int:
        if isinstance(length, bool) or not isinstance(length, Integral):
            raise TypeError(f"edge length must be an integer, got {length!r}")
        length = int(length)
        if length < 1 or (self.length_bound is not None and length > self.length_bound):
            raise ValueError(f"edge length {length} outside [1, {self.length_bound}]")
        return length

    def copy(self, counters: bool = True) -> "DynGraph":
        g = DynGraph(length_bound=self.length_bound)
        g._adj = {v: dict(a) for v, a in self._adj.items()}
        g._ends = dict(self._ends)
        g._len = dict(self._len)
        g._master = dict(self._master)
        g._next_vertex = self._next_vertex
        g._next_edge = self._next_edge
        if counters:
            g._clock, g._total, g._decremental = self._clock, self._total, self._decremental
        return g

    def reset_counters(self) -> None:
        self._clock = self._total = self._decremental = 0

    # -- updates -----------------------------------------------------------

    def apply_update(self, update: Update) -> Change:
        if isinstance(update, InsertEdge):
            change = self._insert_edge(update)
            if change is None:
                return Change(update)
        elif isinstance(update, DeleteEdge):
            change = self._delete_edge(update)
        elif isinstance(update, SplitVertex):
            change = self._split(update)
        elif isinstance(update, InsertVertex):
            v = self.add_vertex()
            change = Change(update, vertices=(v,))
        else:
            raise TypeError(f"unknown update {update!r}")
        self._clock += 1
        self._total = min(self._total + 1, _SATURATE)
        if change.decremental:
            self._decremental = min(self._decremental + 1, _SATURATE)
        return change

    def insert_vertex(self) -> int:
        return self.apply_update(InsertVertex()).vertices[0]

    def insert_edge(self, u, v, length=1) -> int | None:
        return self.apply_update(InsertEdge(u, v, length)).edge

    def delete_edge(self, e) -> None:
        self.apply_update(DeleteEdge(e))

    def split_vertex(self, v, side=frozenset(), edges=None) -> tuple[int, int]:
        return self.apply_update(SplitVertex(v, frozenset(side), edges)).vertices

    def _insert_edge(self, up: InsertEdge) -> Change | None:
        e = self.add_edge(up.u, up.v, up.length)
        if e is None:
            return None
        return Change(up, edge=e, endpoints=(up.u, up.v), length=self._len[e])

    def _delete_edge(self, up: DeleteEdge) -> Change:
        e = up.edge
        if e not in self._ends:
            raise UnknownEdge(e)
        u, v = self._ends.pop(e)
        length = self._len.pop(e)
        del self._adj[u][e]
        del self._adj[v][e]
        return Change(up, touched=frozenset((u, v)), edge=e, endpoints=(u, v), length=length)

    def _split(self, up: SplitVertex) -> Change:
        v = up.vertex
        if v not in self._adj:
            raise UnknownVertex(v)
        adj = self._adj[v]
        if up.edges is not None:
            if not up.edges <= adj.keys():
                raise InvalidSplitSet(f"edges {sorted(up.edges - adj.keys())} not incident to {v}")
            moved = up.edges
        else:
            nbrs = set(adj.values())
            if not up.side <= nbrs:
                raise InvalidSplitSet(f"{sorted(up.side - nbrs)} not adjacent to {v}")
            moved = frozenset(e for e, w in adj.items() if w in up.side)
        a = self.add_vertex()
        b = self.add_vertex()
        lineage = frozenset((v,)) | self._master[v]
        self._master[a] = self._master[b] = lineage
        kept = []
        for e, w in adj.items():
            target = a if e in moved else b
            if e not in moved:
                kept.append(e)
            x, y = self._ends[e]
            self._ends[e] = (target, y) if x == v else (x, target)
            self._adj[w][e] = target
            self._adj[target][e] = w
        del self._adj[v]
        return Change(
            up,
            touched=frozenset((a, b)),
            vertices=(a, b),
            removed=v,
            moved=frozenset(moved),
            kept=frozenset(kept),
        )


class EdgeSubgraph:
    """A subgraph given by a set of edge ids of `base`.

    Endpoints are read from `base`, so vertex splits applied to the base are
    seen immediately.  Vertex set is the vertex set of the base.
    """

    def __init__(self, base: DynGraph, edges: Iterable = ()):
        self.base = base
        self.edge_set: set[int] = set(edges)

    def has_edge(self, e) -> bool:
        return e in self.edge_set and self.base.has_edge(e)

    def has_vertex(self, v) -> bool:
        return self.base.has_vertex(v)

    def endpoints(self, e):
        return self.base.endpoints(e)

    def length(self, e):
        return self.base.length(e)

    def other(self, e, x):
        return self.base.other(e, x)

    def vertices(self):
        return self.base.vertices()

    def edges(self):
        return self.edge_set

    def num_edges(self) -> int:
        return len(self.edge_set)

    def incident(self, v):
        es = self.edge_set
        return [e for e in self.base.incident(v) if e in es]

    def adjacency(self, v) -> dict[int, int]:
        es = self.edge_set
        return {e: w for e, w in self.base.adjacency(v).items() if e in es}

    def degree(self, v) -> int:
        es = self.edge_set
        return sum(1 for e in self.base.incident(v) if e in es)


# -- split simulation -------------------------------------------------------


class SplitSimulator:
    """Mirror a fully-dynamic graph into an edge-dynamic copy.

    Each split is replaced by one isolated-vertex insertion plus a delete and
    re-insert of every edge on the smaller side of the split.  `sink` applies
    an edge-dynamic update downstream and returns its `Change`; by default it
    applies to `self.target`.
    """

    def __init__(self, source: DynGraph, sink: Callable[[Update], Change] | None = None):
        self.source = source
        self.target = source.copy(counters=False)
        self.sink = sink or self.target.apply_update
        self.vertex_map = {v: v for v in source.vertices()}
        self.edge_map = {e: e for e in source.edges()}

    def mirror(self, change: Change) -> list[Change]:
        up = change.update
        sink = self.sink
        if isinstance(up, InsertVertex):
            out = sink(InsertVertex())
            self.vertex_map[change.vertices[0]] = out.vertices[0]
            return [out]
        if isinstance(up, InsertEdge):
            if change.edge is None:
                return []
            u, v = change.endpoints
            out = sink(InsertEdge(self.vertex_map[u], self.vertex_map[v], change.length))
            self.edge_map[change.edge] = out.edge
            return [out]
        if isinstance(up, DeleteEdge):
            return [sink(DeleteEdge(self.edge_map.pop(change.edge)))]
        a, b = change.vertices
        t = self.vertex_map.pop(change.removed)
        if len(change.moved) <= len(change.kept):
            leaving, fresh, stay = change.moved, a, b
        else:
            leaving, fresh, stay = change.kept, b, a
        outs = [sink(InsertVertex())]
        w = outs[0].vertices[0]
        self.vertex_map[stay] = t
        self.vertex_map[fresh] = w
        for e in sorted(leaving):
            x = self.source.other(e, fresh)
            outs.append(sink(DeleteEdge(self.edge_map[e])))
            ins = sink(InsertEdge(w, self.vertex_map[x], self.source.length(e)))
            self.edge_map[e] = ins.edge
            outs.append(ins)
        return outs


def simulate_splits(batch: Iterable[Update], g: DynGraph) -> list[Update]:
    """Rewrite `batch` (valid for `g`) into an equivalent split-free batch.

    The result is meant for an edge-dynamic copy of `g` that hands out ids
    in the same order as `g` does; `g` itself is not modified.
    """
    batch = list(batch)
    if not any(isinstance(u, SplitVertex) for u in batch):
        return batch
    scratch = g.copy()
    sim = SplitSimulator(scratch)
    out: list[Update] = []

    def record(up):
        out.append(up)
        return sim.target.apply_update(up)

    sim.sink = record
    for up in batch:
        sim.mirror(scratch.apply_update(up))
    return out


# -- degree reduction --------------------------------------------------------


def bst_scale(n: int) -> int:
    return 4 * (math.ceil(math.log2(max(n, 1))) + 1)


class BSTReduction:
    """Replace every vertex by a balanced binary tree with one leaf per edge.

    Trees use heap numbering: a vertex with d incident edges owns nodes
    1..2d-1 with leaves d..2d-1.  Original edges get length `scale * l`,
    tree edges length 1.  Only edge-dynamic updates can be mirrored.
    """

    def __init__(self, g: DynGraph, scale: int | None = None, sink=None):
        self.source = g
        self.scale = scale or bst_scale(max(g.num_vertices(), g.max_degree()))
        bound = None if g.length_bound is None else g.length_bound * self.scale
        self.graph = DynGraph(length_bound=bound)
        self.sink = sink or self.graph.apply_update
        self._nodes: dict[int, dict[int, int]] = {}
        self._leaf_edge: dict[int, dict[int, int]] = {}
        self._pos: dict[tuple[int, int], int] = {}
        self.owner: dict[int, int] = {}
        self.edge_map: dict[int, int] = {}
        self.origin: dict[int, int] = {}
        self._length: dict[int, int] = {}
        self._ends: dict[int, tuple[int, int]] = {}
        self._building = True
        for v in g.vertices():
            self._make_root(v)
        for e in sorted(g.edges()):
            self._attach(e)
        self._building = False

    @property
    def vertex_map(self) -> dict[int, int]:
        return {v: nodes[1] for v, nodes in self._nodes.items()}

    def root(self, v) -> int:
        return self._nodes[v][1]

    def leaf_count(self, v) -> int:
        return len(self._leaf_edge[v])

    def _apply(self, up, log):
        if self._building:
            g = self.graph
            if isinstance(up, InsertVertex):
                return Change(up, vertices=(g.add_vertex(),))
            if isinstance(up, InsertEdge):
                e = g.add_edge(up.u, up.v, up.length)
                return Change(up, edge=e, endpoints=(up.u, up.v), length=up.length)
            ends = g.endpoints(up.edge)
            g._delete_edge(up)
            return Change(up, edge=up.edge, endpoints=ends)
        ch = self.sink(up)
        log.append(ch)
        return ch

    def _node(self, v, idx, log) -> int:
        nodes = self._nodes[v]
        if idx not in nodes:
            w = self._apply(InsertVertex(), log).vertices[0]
            nodes[idx] = w
            self.owner[w] = v
        return nodes[idx]

    def _make_root(self, v, log=None):
        self._nodes[v] = {}
        self._leaf_edge[v] = {}
        self._node(v, 1, log)

    def _connect(self, e, log):
        # (re)create the scaled copy of original edge e between its two leaves
        u, v = self._ends[e]
        a = self._nodes[u][self._pos[(u, e)]]
        b = self._nodes[v][self._pos[(v, e)]]
        ch = self._apply(InsertEdge(a, b, self.scale * self._length[e]), log)
        self.edge_map[e] = ch.edge
        self.origin[ch.edge] = e

    def _disconnect(self, e, log):
        f = self.edge_map.pop(e)
        del self.origin[f]
        self._apply(DeleteEdge(f), log)

    def _grow(self, v, e, log) -> None:
        # leaves d..2d-1 become d+1..2d+1; the edge on node d moves to node 2d
        leaves = self._leaf_edge[v]
        d = len(leaves)
        if d == 0:
            leaves[1] = e
            self._pos[(v, e)] = 1
            return
        f = leaves.pop(d)
        self._node(v, 2 * d, log)
        self._node(v, 2 * d + 1, log)
        nodes = self._nodes[v]
        self._apply(InsertEdge(nodes[d], nodes[2 * d], 1), log)
        self._apply(InsertEdge(nodes[d], nodes[2 * d + 1], 1), log)
        leaves[2 * d] = f
        self._pos[(v, f)] = 2 * d
        leaves[2 * d + 1] = e
        self._pos[(v, e)] = 2 * d + 1
        self._disconnect(f, log)
        self._connect(f, log)

    def _shrink(self, v, e, log) -> None:
        leaves = self._leaf_edge[v]
        d = len(leaves)
        i = self._pos.pop((v, e))
        del leaves[i]
        if d == 1:
            return
        last, sib, parent = 2 * d - 1, 2 * d - 2, d - 1
        nodes = self._nodes[v]
        if i != last:
            g = leaves.pop(last)
            leaves[i] = g
            self._pos[(v, g)] = i
            self._disconnect(g, log)
            self._connect(g, log)
        # drop the two deepest leaves' tree edges; the sibling's edge moves up
        h = leaves.pop(sib)
        for child in (sib, last):
            tree_edge = self._tree_edge(nodes[parent], nodes[child])
            self._apply(DeleteEdge(tree_edge), log)
        leaves[parent] = h
        self._pos[(v, h)] = parent
        self._disconnect(h, log)
        self._connect(h, log)

    def _tree_edge(self, a, b) -> int:
        for f, w in self.graph.adjacency(a).items():
            if w == b and f not in self.origin:
                return f
        raise UnknownEdge((a, b))

    def _attach(self, e, log=None) -> None:
        u, v = self.source.endpoints(e)
        self._length[e] = self.source.length(e)
        self._ends[e] = (u, v)
        self._grow(u, e, log)
        self._grow(v, e, log)
        self._connect(e, log)

    def mirror(self, change: Change) -> list[Change]:
        """Translate an applied update of the source into updates here."""
        log: list[Change] = []
        up = change.update
        if isinstance(up, InsertVertex):
            self._make_root(change.vertices[0], log)
        elif isinstance(up, InsertEdge):
            if change.edge is not None:
                self._attach(change.edge, log)
        elif isinstance(up, DeleteEdge):
            e = change.edge
            u, v = self._ends[e]
            self._disconnect(e, log)
            self._shrink(u, e, log)
            self._shrink(v, e, log)
            del self._length[e], self._ends[e]
        else:
            raise ValueError("BSTReduction only mirrors edge-dynamic updates")
        return log

    def lift_walk(self, edges: Iterable[int]) -> list[int]:
        """Original edges along a walk of the reduced graph, in order."""
        origin = self.origin
        return [origin[f] for f in edges if f in origin]


def bst_degree_reduce(g: DynGraph, scale: int | None = None) -> BSTReduction:
    """Degree-3 reduction of an edge-dynamic graph.

    The returned object exposes `graph`, `vertex_map` (vertex -> tree root),
    `edge_map` (edge -> scaled copy) and `mirror` for later updates.
    """
    return BSTReduction(g, scale)


# -- update stream text format ------------------------------------------------


def parse_update(line: str) -> Update | None:
    line = line.strip()
    if not line or line.startswith("#"):
        return None
    parts = line.split()
    op = parts[0]
    try:
        if op == "I" and len(parts) == 4:
            return InsertEdge(int(parts[1]), int(parts[2]), int(parts[3]))
        if op == "D" and len(parts) == 2:
            return DeleteEdge(int(parts[1]))
        if op == "S" and len(parts) in (2, 3):
            side = frozenset(int(x) for x in parts[2].split(",") if x) if len(parts) == 3 else frozenset()
            return SplitVertex(int(parts[1]), side)
        if op == "V" and len(parts) == 1:
            return InsertVertex()
    except ValueError:
        pass
    raise ValueError(f"malformed update line: {line!r}")


def parse_stream(lines: Iterable[str]) -> list[Update]:
    out = []
    for line in lines:
        up = parse_update(line)
        if up is not None:
            out.append(up)
    return out


def format_update(up: Update) -> str:
    if isinstance(up, InsertEdge):
        return f"I {up.u} {up.v} {up.length}"
    if isinstance(up, DeleteEdge):
        return f"D {up.edge}"
    if isinstance(up, SplitVertex):
        if up.edges is not None:
            raise ValueError("edge-set splits have no text form")
        return ("S %d %s" % (up.vertex, ",".join(map(str, sorted(up.side))))).rstrip()
    if isinstance(up, InsertVertex):
        return "V"
    raise TypeError(up)
