"""Low-recourse greedy spanner over length buckets.

Each bucket i holds the edges with lengths in [2^i, 2^(i+1)) and is treated
as unit-length.  An edge joins its bucket spanner iff the spanner has no
path of at most `tau` hops between its endpoints.  Every rejected edge keeps
a witness walk, so after a deletion or split only the edges whose witness
broke are re-examined; the result equals a full rescan in ascending order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..dyngraph import Change, DeleteEdge, DynGraph, EdgeSubgraph, InsertEdge, SplitVertex
from ..embedding import walk_end


def bucket_of(length: int) -> int:
    return int(length).bit_length() - 1


def greedy_tau(n: int) -> float:
    return 2 * math.log2(2 * max(n, 1))


@dataclass
class SpannerDelta:
    inserted: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    rebuilt: bool = False

    def __len__(self) -> int:
        return len(self.inserted) + len(self.removed)


def short_path(view, u, v, max_hops: int):
    """Edge ids of a path with at most `max_hops` hops from u to v, or None.

    Bidirectional BFS expanding the smaller frontier one full level at a
    time, neighbours in ascending edge-id order.
    """
    if u == v:
        return []
    if max_hops < 1:
        return None
    base = getattr(view, "base", view)
    es = view.edge_set if base is not view else None
    sides = ({u: None}, {v: None})
    frontiers = ([u], [v])
    hops = 0
    while hops < max_hops and frontiers[0] and frontiers[1]:
        s = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
        mine, theirs = sides[s], sides[1 - s]
        nxt = []
        for x in frontiers[s]:
            adj = base.adjacency(x)
            for e in sorted(adj):
                if es is not None and e not in es:
                    continue
                y = adj[e]
                if y in mine:
                    continue
                mine[y] = (e, x)
                if y in theirs:
                    return _join(sides, y)
                nxt.append(y)
        frontiers = (nxt, frontiers[1]) if s == 0 else (frontiers[0], nxt)
        hops += 1
    return None


def _join(sides, meet) -> list:
    """u-to-v edge list through `meet` from the two BFS parent maps."""
    left = []
    y = meet
    while sides[0][y] is not None:
        f, y = sides[0][y]
        left.append(f)
    left.reverse()
    y = meet
    while sides[1][y] is not None:
        f, y = sides[1][y]
        left.append(f)
    return left


class GreedySpanner:
    def __init__(self, g: DynGraph, tau: float | None = None):
        self.g = g
        self._tau_override = tau
        self.rebuilds = 0
        self._start()

    def _start(self) -> None:
        g = self.g
        self.n = max(g.num_vertices(), 1)
        self.tau = self._tau_override if self._tau_override is not None else greedy_tau(self.n)
        self.max_hops = math.floor(self.tau)
        self.views: dict[int, EdgeSubgraph] = {}
        self.witness: dict[int, tuple] = {}
        self._by_edge: dict[int, set] = {}
        self._by_vertex: dict[int, set] = {}
        self.decremental = 0
        for e in sorted(g.edges()):
            self._consider(e)

    # -- queries -----------------------------------------------------------

    def edges(self) -> set:
        out: set = set()
        for view in self.views.values():
            out |= view.edge_set
        return out

    def bucket(self, i) -> EdgeSubgraph:
        return self.views[i]

    def __contains__(self, e) -> bool:
        view = self.views.get(bucket_of(self.g.length(e))) if self.g.has_edge(e) else None
        return view is not None and e in view.edge_set

    # -- internals ---------------------------------------------------------

    def _view(self, e) -> EdgeSubgraph:
        i = bucket_of(self.g.length(e))
        view = self.views.get(i)
        if view is None:
            view = self.views[i] = EdgeSubgraph(self.g)
        return view

    def _set_witness(self, e, path) -> None:
        u, _ = self.g.endpoints(e)
        verts = [u]
        for f in path:
            verts.append(self.g.other(f, verts[-1]))
        self.witness[e] = (tuple(path), tuple(verts))
        for f in path:
            self._by_edge.setdefault(f, set()).add(e)
        for x in verts:
            self._by_vertex.setdefault(x, set()).add(e)

    def _drop_witness(self, e) -> None:
        w = self.witness.pop(e, None)
        if w is None:
            return
        for f in w[0]:
            s = self._by_edge.get(f)
            if s is not None:
                s.discard(e)
                if not s:
                    del self._by_edge[f]
        for x in w[1]:
            s = self._by_vertex.get(x)
            if s is not None:
                s.discard(e)
                if not s:
                    del self._by_vertex[x]

    def _consider(self, e, delta: SpannerDelta | None = None) -> None:
        view = self._view(e)
        u, v = self.g.endpoints(e)
        path = short_path(view, u, v, self.max_hops)
        if path is None:
            view.edge_set.add(e)
            if delta is not None:
                delta.inserted.append(e)
        else:
            self._set_witness(e, path)

    def _recheck(self, candidates, delta: SpannerDelta) -> None:
        g = self.g
        for e in sorted(candidates):
            if not g.has_edge(e):
                continue
            path, _ = self.witness[e]
            view = self._view(e)
            u, v = g.endpoints(e)
            self._drop_witness(e)
            if all(f in view.edge_set for f in path) and walk_end(g, u, path) == v:
                self._set_witness(e, path)
            else:
                self._consider(e, delta)

    # -- updates -----------------------------------------------------------

    def update(self, change: Change) -> SpannerDelta:
        """React to a change already applied to the host graph."""
        delta = SpannerDelta()
        up = change.update
        if isinstance(up, InsertEdge):
            if change.edge is not None:
                self._consider(change.edge, delta)
            return delta
        if isinstance(up, DeleteEdge):
            e = change.edge
            i = bucket_of(change.length)
            view = self.views.get(i)
            if view is not None and e in view.edge_set:
                view.edge_set.discard(e)
                delta.removed.append(e)
                candidates = set(self._by_edge.get(e, ()))
            else:
                candidates = set()
                self._drop_witness(e)
        elif isinstance(up, SplitVertex):
            candidates = set(self._by_vertex.get(change.removed, ()))
            for x in change.vertices:
                candidates.update(f for f in self.g.incident(x) if f in self.witness)
        else:
            return delta
        self.decremental += 1
        if self.decremental >= self.n:
            return self._restart(delta)
        self._recheck(candidates, delta)
        return delta

    def _restart(self, delta: SpannerDelta) -> SpannerDelta:
        before = self.edges() | set(delta.removed)
        removed_now = set(delta.removed)
        self.rebuilds += 1
        self._start()
        after = self.edges()
        delta.inserted = sorted(after - before)
        delta.removed = sorted((before - after) | (removed_now - after))
        delta.rebuilt = True
        return delta
