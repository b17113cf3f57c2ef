"""Batch repair of a spanner embedding and the layered rebuild schedule.

`process_batch` patches every guest edge whose witness walk passes a vertex
touched by the batch: the walk is cut at the first touched vertex seen from
each end, the gaps form a small projected graph on the touched vertices,
and that graph is sparsified to decide which original edges to add.

`SpannerState` keeps K+1 layers.  Layer j is rebuilt from layer j-1's
pending updates whenever the clock is a multiple of b^(K-j), where b is the
smallest integer ≥ 2 with b^K ≥ n.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..dyngraph import DeleteEdge, EdgeSubgraph, InsertEdge
from ..embedding import Embedding, Walk, compose, project_walk, walk_end
from ..errors import NoIntersection
from .greedy import SpannerDelta
from .sparsify import SparsifyConfig, SparsifyResult, sparsify


def touched_vertices(changes) -> set:
    S: set = set()
    for ch in changes:
        S |= ch.touched
    return S


def with_ancestors(g, vertices) -> set:
    """`vertices` plus every split ancestor of the live ones."""
    out = set(vertices)
    for x in vertices:
        if g.has_vertex(x):
            out |= g.master(x)
    return out


@dataclass
class BatchResult:
    added: set
    walks: dict
    affected: list
    touched: set
    projected: dict = field(default_factory=dict)
    sparsified: SparsifyResult | None = None

    @property
    def recourse(self) -> int:
        return len(self.added)


def process_batch(changes, G, host, embedding, apsp_factory=None, config: SparsifyConfig | None = None) -> BatchResult:
    """Repair `embedding` after `changes` were applied to `G`.

    `host` is the current spanner (a view over G's edges); `embedding` maps
    G edges to host walks that were valid before the batch and exposes
    `get` and `keys_through`.  Returns the G edges to add to the spanner
    and the new walks for every affected or newly inserted edge.  The
    returned walks use host edges plus the added edges only.
    """
    base = getattr(G, "base", G)
    S = touched_vertices(changes)
    inserted = [
        ch.edge
        for ch in changes
        if isinstance(ch.update, InsertEdge) and ch.edge is not None and G.has_edge(ch.edge)
    ]
    new_edges = set(inserted)
    walks: dict = {}
    for e in inserted:
        u, v = base.endpoints(e)
        walks[e] = Walk((u, v), (e,))
    candidates = embedding.keys_through(with_ancestors(base, S)) if S else set()
    affected = []
    prefix: dict = {}
    suffix: dict = {}
    guest: dict = {}
    host_walks = Embedding()
    for e in sorted(candidates):
        if e in new_edges or not G.has_edge(e):
            continue
        walk = embedding.get(e)
        if walk is None:
            continue
        u, v = base.endpoints(e)
        try:
            proj = project_walk(walk, u, v, S, base, name=e)
        except NoIntersection:
            continue
        affected.append(e)
        prefix[e], suffix[e] = proj.prefix, proj.suffix
        if proj.u_hat == proj.v_hat:
            walks[e] = proj.prefix + proj.suffix
            continue
        guest[e] = (proj.u_hat, proj.v_hat)
        middle = Walk((u, v), (e,))
        host_walks.embed(e, proj.prefix.reversed() + middle + proj.suffix.reversed())
    result = None
    added = set(new_edges)
    if guest:
        verts = {x for uv in guest.values() for x in uv}
        result = sparsify(guest, host_walks, vertices=verts, apsp_factory=apsp_factory, config=config)
        added |= result.edges
        patched = compose(host_walks, result.embedding)
        for e in guest:
            if e in result.edges:
                u, v = base.endpoints(e)
                walks[e] = Walk((u, v), (e,))
            else:
                walks[e] = prefix[e] + patched[e] + suffix[e]
    return BatchResult(added, walks, affected, S, guest, result)


class EffectiveEmbedding:
    """Read-only view choosing, per edge, the walk of the highest layer."""

    def __init__(self, layers):
        self.layers = list(layers)

    def get(self, e, default=None):
        for pi in reversed(self.layers):
            w = pi.get(e)
            if w is not None:
                return w
        return default

    def keys_through(self, vertices) -> set:
        out: set = set()
        for pi in self.layers:
            out |= pi.keys_through(vertices)
        return out

    def keys(self) -> set:
        out: set = set()
        for pi in self.layers:
            out |= pi.keys()
        return out

    def materialize(self) -> Embedding:
        emb = Embedding()
        for e in self.keys():
            emb.embed(e, self.get(e))
        return emb


def integer_root_ceil(n: int, K: int) -> int:
    """Smallest integer b ≥ 2 with b**K ≥ n."""
    b = max(2, int(round(n ** (1.0 / K))))
    while b > 2 and (b - 1) ** K >= n:
        b -= 1
    while b**K < n:
        b += 1
    return b


def rebuild_level(t: int, b: int, K: int) -> int:
    for j in range(K + 1):
        if t % b ** (K - j) == 0:
            return j
    return K


class SpannerState:
    """Fully-dynamic spanner of a unit-length graph via layered rebuilds.

    `G` may be a `DynGraph` or an `EdgeSubgraph` of one; the spanner is an
    `EdgeSubgraph` over the same base.  Call `update` with each change after
    it has been applied to the base graph.
    """

    def __init__(self, G, K: int = 2, apsp_factory=None, config: SparsifyConfig | None = None, check=False):
        self.G = G
        self.base = getattr(G, "base", G)
        self.K = max(1, int(K))
        self.apsp_factory = apsp_factory
        self.config = config
        self.check = check
        self.restarts = -1
        self.history: list = []
        self._restart()

    # -- state ---------------------------------------------------------------

    def _restart(self) -> None:
        self.restarts += 1
        self.n = max(self.base.num_vertices(), 2)
        self.b = integer_root_ceil(self.n, self.K)
        self.t = 0
        K = self.K
        self.layers: list[set] = [set() for _ in range(K + 1)]
        self.pis: list[Embedding] = [Embedding() for _ in range(K + 1)]
        self.batches: list[list] = [[] for _ in range(K + 1)]
        self.count: Counter = Counter()
        self.H = EdgeSubgraph(self.base)
        guest = {e: self.base.endpoints(e) for e in self.G.edges()}
        ident = Embedding()
        for e, (u, v) in guest.items():
            ident.embed(e, Walk((u, v), (e,)))
        res = sparsify(guest, ident, vertices=list(self.base.vertices()), apsp_factory=self.apsp_factory, config=self.config)
        self.initial = res
        for e in res.edges:
            self._add(0, e)
        for e, w in res.embedding.items():
            self.pis[0].embed(e, w)

    def _add(self, i, e) -> None:
        self.layers[i].add(e)
        self.count[e] += 1
        self.H.edge_set.add(e)

    def _drop(self, i, e) -> None:
        self.layers[i].discard(e)
        self.count[e] -= 1
        if self.count[e] <= 0:
            del self.count[e]
            self.H.edge_set.discard(e)

    def edges(self) -> set:
        return self.H.edge_set

    def effective(self, upto: int | None = None) -> EffectiveEmbedding:
        top = self.K if upto is None else upto
        return EffectiveEmbedding(self.pis[: top + 1])

    def rebuild_level(self, t: int) -> int:
        return rebuild_level(t, self.b, self.K)

    def batch_sizes(self) -> list[int]:
        return [len(u) for u in self.batches]

    def batch_caps(self) -> list[int]:
        return [self.b ** (self.K - i) for i in range(self.K + 1)]

    def validate(self) -> bool:
        """The effective embedding maps every G edge onto a walk in the spanner."""
        eff = self.effective()
        H = self.H
        for e in self.G.edges():
            w = eff.get(e)
            if w is None:
                return False
            u, v = self.base.endpoints(e)
            if walk_end(H, u, w.edges) != v:
                return False
        return True

    # -- updates -------------------------------------------------------------

    def update(self, change) -> SpannerDelta:
        return self.update_batch([change])

    def update_batch(self, changes) -> SpannerDelta:
        """Advance the clock by one step carrying every change in `changes`."""
        delta = SpannerDelta()
        before: dict = {}
        changes = list(changes)
        if not changes:
            return delta
        for change in changes:
            if isinstance(change.update, DeleteEdge):
                e = change.edge
                if e in self.count:
                    for i in range(self.K + 1):
                        if e in self.layers[i]:
                            self._drop(i, e)
                    delta.removed.append(e)
                for pi in self.pis:
                    pi.discard(e)
        self.t += 1
        for batch in self.batches:
            batch.extend(changes)
        j = self.rebuild_level(self.t)
        if j == 0:
            old = set(self.H.edge_set)
            self._restart()
            new = self.H.edge_set
            delta.removed.extend(sorted(old - new))
            delta.inserted.extend(sorted(new - old))
            delta.rebuilt = True
            self.history.append((self.t, 0))
            return delta
        for i in range(j, self.K + 1):
            for e in self.layers[i]:
                before.setdefault(e, True)
        for i in range(j, self.K + 1):
            for e in list(self.layers[i]):
                self._drop(i, e)
            self.pis[i] = Embedding()
            self.batches[i] = []
        res = process_batch(
            self.batches[j - 1],
            self.G,
            self.H,
            self.effective(j - 1),
            apsp_factory=self.apsp_factory,
            config=self.config,
        )
        self.last_batch = res
        for e in res.added:
            before.setdefault(e, e in self.count)
            self._add(j, e)
        for e, w in res.walks.items():
            self.pis[j].embed(e, w)
        for e, was in before.items():
            now = e in self.count
            if was and not now:
                delta.removed.append(e)
            elif now and not was:
                delta.inserted.append(e)
        self.history.append((self.t, j))
        if self.check and not self.validate():
            from ..errors import InvariantViolation

            raise InvariantViolation("embedding-valid", f"after update {self.t}")
        return delta
