"""Spanner of a graph with integer lengths: one unit-length spanner per bucket.

Bucket i holds the edges with lengths in [2^i, 2^(i+1)).  Vertex splits and
isolated insertions are routed to every bucket; edge updates only to the
bucket of the edge.
"""
from __future__ import annotations

from ..dyngraph import DeleteEdge, DynGraph, EdgeSubgraph, InsertEdge
from .batch import SpannerState
from .greedy import SpannerDelta, bucket_of


class WeightedSpanner:
    def __init__(self, G: DynGraph, K: int = 2, apsp_factory=None, config=None, check=False):
        self.G = G
        self.K = K
        self.apsp_factory = apsp_factory
        self.config = config
        self.check = check
        self.views: dict[int, EdgeSubgraph] = {}
        self.states: dict[int, SpannerState] = {}
        for e in G.edges():
            self._view(bucket_of(G.length(e))).edge_set.add(e)
        for i in sorted(self.views):
            self.states[i] = self._make(i)
        self.H = EdgeSubgraph(G, self._union())

    def _view(self, i) -> EdgeSubgraph:
        view = self.views.get(i)
        if view is None:
            view = self.views[i] = EdgeSubgraph(self.G)
        return view

    def _make(self, i) -> SpannerState:
        return SpannerState(self.views[i], self.K, self.apsp_factory, self.config, self.check)

    def _union(self) -> set:
        out: set = set()
        for st in self.states.values():
            out |= st.edges()
        return out

    def edges(self) -> set:
        return self.H.edge_set

    def buckets(self) -> list[int]:
        return sorted(self.states)

    def validate(self) -> bool:
        return all(st.validate() for st in self.states.values())

    def update(self, change) -> SpannerDelta:
        return self.update_batch([change])

    def update_batch(self, changes) -> SpannerDelta:
        """Apply one time step made of `changes` (already applied to G)."""
        routed: dict[int, list] = {i: [] for i in self.states}
        fresh: set = set()
        for ch in changes:
            up = ch.update
            if isinstance(up, InsertEdge):
                if ch.edge is None:
                    continue
                i = bucket_of(ch.length)
                self._view(i).edge_set.add(ch.edge)
                if i in self.states:
                    routed[i].append(ch)
                else:
                    fresh.add(i)
            elif isinstance(up, DeleteEdge):
                i = bucket_of(ch.length)
                self.views[i].edge_set.discard(ch.edge)
                if i in routed:
                    routed[i].append(ch)
            else:
                for batch in routed.values():
                    batch.append(ch)
        total = SpannerDelta()
        for i, batch in routed.items():
            if not batch:
                continue
            d = self.states[i].update_batch(batch)
            total.inserted.extend(d.inserted)
            total.removed.extend(d.removed)
            total.rebuilt |= d.rebuilt
        for i in sorted(fresh):
            self.states[i] = self._make(i)
            total.inserted.extend(sorted(self.states[i].edges()))
        for e in total.removed:
            self.H.edge_set.discard(e)
        self.H.edge_set.update(total.inserted)
        return total
