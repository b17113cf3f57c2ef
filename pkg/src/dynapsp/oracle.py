"""Exact reference algorithms: Dijkstra, stretch and girth checks, exact APSP.

Functions here accept anything exposing `adjacency(v) -> {edge: neighbour}`,
`length(e)` and `vertices()`, so both `DynGraph` and `EdgeSubgraph` work.
Disconnected pairs are reported as `None`, never as a sentinel length.
"""
from __future__ import annotations

import heapq
import math
from collections import OrderedDict, deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import Disconnected, UnknownVertex


def dijkstra(g, source, cutoff=None, target=None, stop=None):
    """Single-source shortest paths with deterministic ties.

    Returns `(dist, parent)` where `parent[v] = (edge, prev)`.  Among equal
    distance predecessors the smaller vertex id wins, then the smaller edge
    id.  Vertices farther than `cutoff` are not settled.  The search ends
    early once `target` is settled or `stop(v, d)` returns true for a
    settled vertex.
    """
    if not g.has_vertex(source):
        raise UnknownVertex(source)
    dist = {source: 0}
    parent: dict = {}
    done = set()
    heap = [(0, source)]
    length = g.length
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == target or (stop is not None and stop(x, d)):
            break
        for e, y in g.adjacency(x).items():
            if y in done:
                continue
            nd = d + length(e)
            if cutoff is not None and nd > cutoff:
                continue
            old = dist.get(y)
            if old is None or nd < old:
                dist[y] = nd
                parent[y] = (e, x)
                heapq.heappush(heap, (nd, y))
            elif nd == old and (x, e) < parent[y][::-1]:
                parent[y] = (e, x)
    # drop tentative labels that were never settled
    if len(done) != len(dist):
        dist = {v: d for v, d in dist.items() if v in done}
        parent = {v: p for v, p in parent.items() if v in done}
    return dist, parent


def trace_path(parent, source, target) -> list[int]:
    """Edge ids from `source` to `target` following a parent map."""
    out = []
    x = target
    while x != source:
        e, x = parent[x]
        out.append(e)
    out.reverse()
    return out


def exact_dist(g, u, v):
    if not g.has_vertex(v):
        raise UnknownVertex(v)
    if u == v:
        if not g.has_vertex(u):
            raise UnknownVertex(u)
        return 0
    dist, _ = dijkstra(g, u, target=v)
    return dist.get(v)


def exact_path(g, u, v) -> list[int]:
    if not g.has_vertex(v):
        raise UnknownVertex(v)
    dist, parent = dijkstra(g, u, target=v)
    if v not in dist:
        raise Disconnected(f"{u} and {v} are not connected")
    return trace_path(parent, u, v)


def walk_length(g, edges) -> int:
    return sum(g.length(e) for e in edges)


def replay_walk(g, start, edges):
    """End vertex of the walk, or None if some edge is missing or misplaced."""
    x = start
    for e in edges:
        if not g.has_edge(e):
            return None
        a, b = g.endpoints(e)
        if x == a:
            x = b
        elif x == b:
            x = a
        else:
            return None
    return x


def bellman_ford(g, source) -> dict:
    """Plain Bellman-Ford; an independent cross-check for Dijkstra."""
    dist = {source: 0}
    edges = [(g.endpoints(e), g.length(e)) for e in g.edges()]
    for _ in range(max(len(list(g.vertices())) - 1, 1)):
        changed = False
        for (a, b), w in edges:
            for x, y in ((a, b), (b, a)):
                if x in dist and (y not in dist or dist[x] + w < dist[y]):
                    dist[y] = dist[x] + w
                    changed = True
        if not changed:
            break
    return dist


def distance_matrix(g, sources=None):
    """Exact distances from `sources` (default: all) via scipy.

    Returns `(index, matrix)` where `index` maps vertex id to column and
    unreachable entries are `inf`.
    """
    verts = sorted(g.vertices())
    index = {v: i for i, v in enumerate(verts)}
    best: dict[tuple[int, int], int] = {}
    for e in g.edges():
        a, b = g.endpoints(e)
        key = (index[a], index[b]) if index[a] < index[b] else (index[b], index[a])
        w = g.length(e)
        if key not in best or w < best[key]:
            best[key] = w
    n = len(verts)
    if best:
        rows, cols = zip(*best.keys())
        mat = csr_matrix((np.fromiter(best.values(), float), (rows, cols)), shape=(n, n))
    else:
        mat = csr_matrix((n, n))
    idx = None if sources is None else [index[s] for s in sources]
    out = _csgraph_dijkstra(mat, directed=False, indices=idx)
    return index, np.atleast_2d(out)


class ExactApsp:
    """Exact dynamic APSP over a graph; stretch is 1.

    Single-source trees are memoised and dropped whenever the graph changes.
    """

    stretch = 1.0

    def __init__(self, g, memo_size: int = 64):
        self.graph = g
        self._memo: OrderedDict = OrderedDict()
        self._memo_size = memo_size
        self._version = None

    def _stamp(self):
        g = self.graph
        base = getattr(g, "base", g)
        return (base.clock, base.next_edge_id, base.next_vertex_id, getattr(g, "version", 0))

    def _tree(self, u):
        stamp = self._stamp()
        if stamp != self._version:
            self._memo.clear()
            self._version = stamp
        tree = self._memo.get(u)
        if tree is None:
            tree = dijkstra(self.graph, u)
            self._memo[u] = tree
            if len(self._memo) > self._memo_size:
                self._memo.popitem(last=False)
        else:
            self._memo.move_to_end(u)
        return tree

    def add_edge(self, u, v, length=1):
        return self.graph.insert_edge(u, v, length)

    def remove_edge(self, e):
        self.graph.delete_edge(e)

    def dist(self, u, v, cutoff=None):
        if u == v:
            if not self.graph.has_vertex(u):
                raise UnknownVertex(u)
            return 0
        if cutoff is not None:
            d, _ = dijkstra(self.graph, u, cutoff=cutoff, target=v)
            return d.get(v)
        return self._tree(u)[0].get(v)

    def dist_path(self, u, v, cutoff=None):
        """(distance, edge list) from one search; (None, None) if farther than cutoff."""
        if u == v:
            return self.dist(u, v), []
        if cutoff is not None:
            d, parent = dijkstra(self.graph, u, cutoff=cutoff, target=v)
        else:
            d, parent = self._tree(u)
        if v not in d:
            return None, None
        return d[v], trace_path(parent, u, v)

    def path(self, u, v, cutoff=None):
        if u == v:
            return []
        if cutoff is not None:
            d, parent = dijkstra(self.graph, u, cutoff=cutoff, target=v)
        else:
            d, parent = self._tree(u)
        if v not in d:
            raise Disconnected(f"{u} and {v} are not connected")
        return trace_path(parent, u, v)


def verify_stretch(g, estimator, pairs):
    """Compare estimates with exact distances on `pairs`.

    Returns `(max_ratio, violations)`; a violation is a pair whose estimate
    is below the exact distance or missing although the pair is connected.
    """
    by_source: dict = {}
    for u, v in pairs:
        by_source.setdefault(u, []).append(v)
    max_ratio = 1.0
    violations = []
    for u, targets in by_source.items():
        dist, _ = dijkstra(g, u)
        for v in targets:
            exact = dist.get(v)
            if exact is None:
                continue
            est = estimator.dist(u, v)
            if est is None or est < exact:
                violations.append((u, v, est, exact))
                continue
            if exact > 0:
                max_ratio = max(max_ratio, est / exact)
    return max_ratio, violations


def girth_exceeds(g, gamma) -> bool:
    """True iff every cycle of `g`, counted in hops, is longer than `gamma`."""
    limit = math.ceil(gamma / 2) + 1
    for root in g.vertices():
        depth = {root: 0}
        via = {root: None}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            dx = depth[x]
            for e, y in g.adjacency(x).items():
                if e == via[x]:
                    continue
                if y in depth:
                    if dx + depth[y] + 1 <= gamma:
                        return False
                    continue
                if dx + 1 > limit:
                    continue
                depth[y] = dx + 1
                via[y] = e
                queue.append(y)
    return True
