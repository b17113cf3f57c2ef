"""Pivots, certified clusters and a contracted graph over the pivots.

Every vertex u gets a pivot p(u), the nearest pivot with ties broken by the
smaller id, and a record of exact distances and shortest-path parents for
all vertices no farther than p(u).  The cluster C(u) is the set of vertices
strictly closer to u than p(u).

The contracted graph has one vertex per pivot.  Each original edge (u, v)
contributes edges (a, b) for pivots a near u and b near v, of length
dist(a, u) + len(u, v) + dist(v, b), each remembering the original walk it
stands for.  Such a walk always exists and is never longer than the
contracted edge, so contracted distances never under-estimate.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .dyngraph import Change, DeleteEdge, DynGraph, InsertEdge, InsertVertex, SplitVertex
from .embedding import Walk
from .errors import EpochExceeded, NotAStar, RepairBudgetExceeded, StaleEdge, UnknownVertex


def default_tau(n: int) -> int:
    return 4 * max(1, math.ceil(math.log2(max(n, 2))))


def _nearest_uncovered(G, u, uncovered, want):
    # Dijkstra from u, returning the first `want` uncovered vertices popped
    found = []
    dist = {u: 0}
    done = set()
    heap = [(0, u)]
    while heap and len(found) < want:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x in uncovered:
            found.append(x)
        for e, y in G.adjacency(x).items():
            nd = d + G.length(e)
            if y not in done and (y not in dist or nd < dist[y]):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return found


def _kth_nearest(G, u, k):
    # k-th vertex popped by Dijkstra from u (u itself is the first)
    dist = {u: 0}
    done = []
    seen = set()
    heap = [(0, u)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in seen:
            continue
        seen.add(x)
        done.append(x)
        if len(done) == k:
            return x
        for e, y in G.adjacency(x).items():
            nd = d + G.length(e)
            if y not in seen and (y not in dist or nd < dist[y]):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return done[-1]


def select_pivots(G, k: int, tau: int | None = None) -> set:
    """Deterministic ball carving followed by a cluster-size repair pass."""
    k = max(1, int(math.ceil(k)))
    if tau is None:
        tau = default_tau(G.num_vertices())
    uncovered = set(G.vertices())
    A: set = set()
    for u in sorted(G.vertices()):
        if u not in uncovered:
            continue
        A.add(u)
        for x in _nearest_uncovered(G, u, uncovered, min(k, len(uncovered))):
            uncovered.discard(x)
    budget = 4 * G.num_vertices() / k
    repairs = 0
    cap = tau * k
    for u in sorted(G.vertices()):
        rec = certify_vertex(G, A, u, 1)
        if len(rec.cluster()) > cap:
            repairs += 1
            if repairs > budget:
                raise RepairBudgetExceeded(f"{repairs} repairs exceed budget {budget:.1f}")
            A.add(_kth_nearest(G, u, k))
    return A


@dataclass
class PivotRecord:
    vertex: int
    pivot: int
    radius: int
    dist: dict
    parent: dict
    fan: tuple
    paths: dict = field(default_factory=dict)

    def cluster(self) -> set:
        r = self.radius
        return {x for x, d in self.dist.items() if d < r}

    def certified(self, v) -> bool:
        """True if the exact distance to v is stored (v in C(u) or v = p(u))."""
        if v == self.pivot:
            return True
        d = self.dist.get(v)
        return d is not None and d < self.radius

    def path_to(self, v) -> list[int]:
        out = []
        x = v
        while x != self.vertex:
            e, x = self.parent[x]
            out.append(e)
        out.reverse()
        return out

    def signature(self):
        return (self.fan, tuple(self.dist[a] for a in self.fan), tuple(self.paths[a] for a in self.fan))


def certify_vertex(G, A, u, f: int = 1) -> PivotRecord:
    """Truncated Dijkstra from u.

    Settles every vertex within dist(u, p(u)) and, for f > 1, continues up
    to 2 dist(u, p(u)) until f pivots are found.
    """
    dist = {u: 0}
    parent: dict = {}
    settled: dict = {}
    heap = [(0, u)]
    pivots: list = []
    radius = None
    limit = math.inf
    while heap:
        d, x = heap[0]
        if d > limit or (radius is not None and d > radius and len(pivots) >= f):
            break
        heapq.heappop(heap)
        if x in settled:
            continue
        settled[x] = d
        if x in A:
            if radius is None:
                radius = d
                limit = 2 * d if f > 1 else d
            if len(pivots) < f:
                pivots.append(x)
        for e, y in G.adjacency(x).items():
            if y in settled:
                continue
            nd = d + G.length(e)
            old = dist.get(y)
            if old is None or nd < old:
                dist[y] = nd
                parent[y] = (e, x)
                heapq.heappush(heap, (nd, y))
            elif nd == old and (x, e) < parent[y][::-1]:
                parent[y] = (e, x)
    if radius is None:
        raise UnknownVertex(f"no pivot reachable from {u}")
    parent = {x: parent[x] for x in settled if x != u}
    rec = PivotRecord(u, pivots[0], radius, settled, parent, tuple(pivots))
    rec.paths = {a: tuple(rec.path_to(a)) for a in rec.fan}
    return rec


def pivot_gap_check(G, records, u, v, dist) -> bool:
    """dist(p(u), p(v)) ≤ 4 dist(u, v) whenever v lies outside u's ball."""
    ru, rv = records[u], records[v]
    duv = dist(u, v)
    if duv is None or ru.certified(v) and v != ru.pivot:
        return True
    if duv < ru.radius:
        return True
    dpp = dist(ru.pivot, rv.pivot)
    return dpp is not None and dpp <= 4 * duv


class VertexSparsifier:
    """Pivot state plus the contracted graph `gt` with back-walks into G.

    `G` must be edge-dynamic.  Call `handle` with each change after it was
    applied to `G` (later changes may already be applied too); the returned
    list holds the changes applied to `gt`.
    If `listener` is set it sees each of those changes right after it is
    applied, before the next one.
    """

    listener = None

    def __init__(
        self,
        G: DynGraph,
        k: int,
        f: int = 4,
        tau: int | None = None,
        epoch: int | None = None,
        pivots=None,
        simple: bool = False,
    ):
        self.G = G
        self.simple = simple
        self.k = max(1, int(k))
        self.f = max(1, int(f))
        self.tau = tau if tau is not None else default_tau(G.num_vertices())
        self.A: set = set(pivots) if pivots is not None else select_pivots(G, self.k, self.tau)
        self.A0 = len(self.A)
        self.initial_edges = G.num_edges()
        self.epoch = epoch if epoch is not None else max(1, math.ceil(self.initial_edges / self.k))
        self.updates = 0
        self.R_V = 0
        self.R_E = 0
        self.records: dict[int, PivotRecord] = {}
        self.watchers: dict[int, set] = {}
        self.gt = DynGraph(length_bound=None)
        self.tilde_of: dict[int, int] = {}
        self.g_of: dict[int, int] = {}
        self.derived: dict[int, dict] = {}
        self.back: dict[int, Walk] = {}
        self.source: dict[int, int] = {}
        self.stars: set = set()
        # simple mode: candidate tuples per unordered pivot pair, and the
        # (gt edge, candidate key, tuple) currently standing for the pair
        self.cands: dict[tuple, dict] = {}
        self.rep: dict[tuple, tuple] = {}
        for u in sorted(G.vertices()):
            try:
                rec = certify_vertex(G, self.A, u, self.f)
            except UnknownVertex:
                # a component without a pivot gets its smallest vertex
                self.A.add(u)
                rec = certify_vertex(G, self.A, u, self.f)
            self._set_record(rec)
        self.A0 = len(self.A)
        for a in sorted(self.A):
            w = self.gt.add_vertex()
            self.tilde_of[a] = w
            self.g_of[w] = a
        dirty: set = set()
        for e in sorted(G.edges()):
            self._derive(e, None, dirty)
        self._settle(dirty, None)

    # -- records -----------------------------------------------------------

    def _set_record(self, rec: PivotRecord) -> None:
        old = self.records.get(rec.vertex)
        if old is not None:
            for x in old.dist:
                s = self.watchers.get(x)
                if s is not None:
                    s.discard(rec.vertex)
        self.records[rec.vertex] = rec
        for x in rec.dist:
            self.watchers.setdefault(x, set()).add(rec.vertex)

    def pivot(self, u) -> int:
        return self.records[u].pivot

    def cluster(self, u) -> set:
        return self.records[u].cluster()

    def image(self, a) -> int:
        """Contracted-graph vertex holding pivot a."""
        return self.tilde_of[a]

    # -- contracted edges ----------------------------------------------------

    def _tuples(self, e) -> dict:
        u, v = self.G.endpoints(e)
        ru, rv = self.records[u], self.records[v]
        out = {}
        length = self.G.length(e)
        for a in ru.fan:
            for b in rv.fan:
                if a == b:
                    continue
                total = ru.dist[a] + length + rv.dist[b]
                edges = tuple(reversed(ru.paths[a])) + (e,) + rv.paths[b]
                out[(a, b)] = (total, edges)
        return out

    def _derive(self, e, log, dirty=None) -> None:
        if self.simple:
            self._derive_candidates(e, self._tuples(e), dirty)
            return
        new = self._tuples(e)
        old = self.derived.get(e, {})
        keep = {}
        for key, gid in old.items():
            want = new.get(key)
            if want is not None and want[0] == self.gt.length(gid) and want[1] == self.back[gid].edges:
                keep[key] = gid
            else:
                self._remove_gt(gid, log)
        for key, (total, edges) in new.items():
            if key in keep:
                continue
            a, b = key
            walk = Walk.from_edges(self.G, a, edges)
            gid = self._insert_gt(self.tilde_of[a], self.tilde_of[b], total, log)
            self.back[gid] = walk
            self.source[gid] = e
            keep[key] = gid
        if keep:
            self.derived[e] = keep
        else:
            self.derived.pop(e, None)

    @staticmethod
    def _pair(key) -> tuple:
        a, b = key
        return (a, b) if a < b else (b, a)

    def _derive_candidates(self, e, new: dict, dirty: set) -> None:
        old = self.derived.get(e, {})
        for key, val in old.items():
            if new.get(key) != val:
                pair = self._pair(key)
                del self.cands[pair][(e, key)]
                dirty.add(pair)
        for key, val in new.items():
            if old.get(key) != val:
                pair = self._pair(key)
                self.cands.setdefault(pair, {})[(e, key)] = val
                dirty.add(pair)
        if new:
            self.derived[e] = new
        else:
            self.derived.pop(e, None)

    def _settle(self, dirty: set, log) -> None:
        """Make the gt edge of each dirty pair the shortest candidate."""
        for pair in sorted(dirty):
            cands = self.cands.get(pair)
            best = None
            if cands:
                best = min(cands.items(), key=lambda kv: (kv[1][0], kv[0]))
            else:
                self.cands.pop(pair, None)
            cur = self.rep.get(pair)
            if cur is not None and best is not None and cur[1:] == best:
                continue
            if cur is not None:
                self._remove_gt(cur[0], log)
                del self.rep[pair]
            if best is None:
                continue
            (e, (a, b)), (total, edges) = best
            gid = self._insert_gt(self.tilde_of[a], self.tilde_of[b], total, log)
            self.back[gid] = Walk.from_edges(self.G, a, edges)
            self.source[gid] = e
            self.rep[pair] = (gid, best[0], best[1])

    def _insert_gt(self, x, y, length, log):
        if log is None:
            return self.gt.add_edge(x, y, length)
        ch = self.gt.apply_update(InsertEdge(x, y, length))
        self._emit(ch, log)
        return ch.edge

    def _remove_gt(self, gid, log) -> None:
        if log is None:
            self.gt._delete_edge(DeleteEdge(gid))
        else:
            ch = self.gt.apply_update(DeleteEdge(gid))
        self.back.pop(gid, None)
        self.source.pop(gid, None)
        self.stars.discard(gid)
        if log is not None:
            self._emit(ch, log)

    def _emit(self, ch, log) -> None:
        log.append(ch)
        if self.listener is not None:
            self.listener(ch)

    def _new_pivot(self, x, log) -> None:
        if x in self.A:
            return
        self.A.add(x)
        ch = self.gt.apply_update(InsertVertex())
        w = ch.vertices[0]
        self.tilde_of[x] = w
        self.g_of[w] = x
        self._emit(ch, log)

    # -- updates -------------------------------------------------------------

    @property
    def epoch_exceeded(self) -> bool:
        return self.updates > self.epoch

    def handle(self, change: Change) -> list[Change]:
        return self.handle_batch([change])

    def handle_batch(self, changes) -> list[Change]:
        """Process changes already applied to `G`, in order, as one step."""
        changes = list(changes)
        if any(isinstance(ch.update, SplitVertex) for ch in changes):
            raise ValueError("the vertex sparsifier expects an edge-dynamic graph")
        self.updates += len(changes)
        if self.epoch_exceeded:
            raise EpochExceeded(f"{self.updates} updates exceed the epoch of {self.epoch}")
        log: list[Change] = []
        touched: set = set()
        inserted: set = set()
        dirty: set = set()
        for ch in changes:
            up = ch.update
            if isinstance(up, InsertVertex):
                touched.add(ch.vertices[0])
            elif isinstance(up, InsertEdge):
                if ch.edge is None:
                    continue
                touched.update(ch.endpoints)
                inserted.add(ch.edge)
            elif isinstance(up, DeleteEdge):
                touched.update(ch.endpoints)
                inserted.discard(ch.edge)
                if self.simple:
                    self._derive_candidates(ch.edge, {}, dirty)
                    continue
                for gid in list(self.derived.pop(ch.edge, {}).values()):
                    self._remove_gt(gid, log)
        for x in sorted(touched):
            self._new_pivot(x, log)
        recert = set(touched)
        for x in touched:
            recert |= self.watchers.get(x, set())
        changed = set()
        for u in sorted(recert):
            old = self.records.get(u)
            rec = certify_vertex(self.G, self.A, u, self.f)
            self._set_record(rec)
            if old is None or old.signature() != rec.signature():
                changed.add(u)
        todo = {e for e in inserted if self.G.has_edge(e)}
        for u in changed:
            todo.update(self.G.incident(u))
        for e in sorted(todo):
            self._derive(e, log, dirty)
        if self.simple:
            self._settle(dirty, log)
        return log

    # -- degree reduction -----------------------------------------------------

    def reduce_degree(self, edges, z: int, delta: int) -> list[Change]:
        """Split the common endpoint of `edges` so no copy keeps more than z·delta of them.

        Copies are tied to the remaining vertex by length-1 edges.
        """
        edges = sorted(edges)
        if not edges:
            return []
        gt = self.gt
        common = set(gt.endpoints(edges[0]))
        for g in edges[1:]:
            common &= set(gt.endpoints(g))
        if not common:
            raise NotAStar("edges do not share an endpoint")
        w = min(common)
        cap = max(1, int(z * delta))
        self.R_E += len(edges)
        if len(edges) <= cap:
            return []
        log: list[Change] = []
        buckets = [edges[i : i + cap] for i in range(0, len(edges), cap)]
        a = self.g_of[w]
        for bucket in buckets[:0:-1]:
            ch = gt.apply_update(SplitVertex(w, edges=frozenset(bucket)))
            copy, rest = ch.vertices
            del self.g_of[w]
            self.g_of[copy] = a
            self.g_of[rest] = a
            if self.tilde_of.get(a) == w:
                self.tilde_of[a] = rest
            self._emit(ch, log)
            star = gt.apply_update(InsertEdge(copy, rest, 1))
            self.stars.add(star.edge)
            self.back[star.edge] = Walk.trivial(a)
            self._emit(star, log)
            w = rest
            self.R_V += 1
        return log

    # -- back-mapping ---------------------------------------------------------

    def map_back_path(self, path, start) -> list[int]:
        """Original edges along a contracted walk starting at vertex `start`."""
        out: list[int] = []
        cur = start
        for g in path:
            if not self.gt.has_edge(g):
                raise StaleEdge(g)
            nxt = self.gt.other(g, cur)
            walk = self.back[g]
            if g not in self.stars:
                walk = walk.oriented_from(self.g_of[cur])
            out.extend(walk.edges)
            cur = nxt
        return out

    # -- checks ---------------------------------------------------------------

    def soundness_violations(self) -> list:
        """Contracted edges whose back-walk is broken or too long."""
        bad = []
        for g in self.gt.edges():
            walk = self.back.get(g)
            x, y = self.gt.endpoints(g)
            a, b = self.g_of[x], self.g_of[y]
            if walk is None:
                bad.append(g)
                continue
            try:
                w = Walk.from_edges(self.G, walk.start, walk.edges)
            except Exception:
                bad.append(g)
                continue
            if {w.start, w.end} != {a, b} or sum(self.G.length(e) for e in w.edges) > self.gt.length(g):
                bad.append(g)
        return bad

    def dump(self) -> str:
        lines = []
        for g in sorted(self.gt.edges()):
            x, y = self.gt.endpoints(g)
            lines.append(f"{x} {y} {self.gt.length(g)} {self.source.get(g, -1)}")
        for u in sorted(self.records):
            r = self.records[u]
            lines.append(f"P {u} {r.pivot} {r.radius}")
        return "\n".join(lines) + "\n"
