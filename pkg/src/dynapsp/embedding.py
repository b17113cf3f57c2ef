"""Edge embeddings: guest edges mapped to walks in a host graph.

A `Walk` stores both its vertex sequence and its edge ids, so it stays
unambiguous in multigraphs.  Congestion counts occurrences with
multiplicity; a walk's vertices include both of its endpoints.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import EndpointMismatch, GraphMismatch, MissingHostEdge, NoIntersection


@dataclass(frozen=True)
class Walk:
    vertices: tuple
    edges: tuple = ()

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("a walk needs exactly one more vertex than edges")

    @classmethod
    def trivial(cls, v) -> "Walk":
        return cls((v,), ())

    @classmethod
    def from_edges(cls, host, start, edges: Iterable[int]) -> "Walk":
        """Build a walk by following `edges` from `start` in `host`."""
        verts = [start]
        x = start
        edges = tuple(edges)
        for e in edges:
            if not host.has_edge(e):
                raise MissingHostEdge(e)
            a, b = host.endpoints(e)
            if x == a:
                x = b
            elif x == b:
                x = a
            else:
                raise EndpointMismatch(f"edge {e} is not incident to {x}")
            verts.append(x)
        return cls(tuple(verts), edges)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.edges)

    def reversed(self) -> "Walk":
        return Walk(self.vertices[::-1], self.edges[::-1])

    def oriented_from(self, x) -> "Walk":
        if self.start == x:
            return self
        if self.end == x:
            return self.reversed()
        raise EndpointMismatch(f"walk {self.start}..{self.end} does not start or end at {x}")

    def __add__(self, other: "Walk") -> "Walk":
        if self.end != other.start:
            raise EndpointMismatch(f"cannot join walk ending at {self.end} to one starting at {other.start}")
        return Walk(self.vertices + other.vertices[1:], self.edges + other.edges)

    def host_length(self, host) -> int:
        return sum(host.length(e) for e in self.edges)


def splice(*parts: Walk) -> Walk:
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


class Embedding:
    """Guest key -> host walk, with incrementally maintained congestion.

    `length()` is the maximum number of host edges on a stored walk.
    """

    def __init__(self):
        self.walks: dict = {}
        self.econg: Counter = Counter()
        self.vcong: Counter = Counter()
        self._lengths: Counter = Counter()
        self._by_vertex: dict = {}

    def __len__(self) -> int:
        return len(self.walks)

    def __contains__(self, key) -> bool:
        return key in self.walks

    def __getitem__(self, key) -> Walk:
        return self.walks[key]

    def get(self, key, default=None):
        return self.walks.get(key, default)

    def keys(self):
        return self.walks.keys()

    def items(self):
        return self.walks.items()

    def embed(self, key, walk: Walk, ends=None, host=None) -> None:
        """Store `walk` for `key`, replacing any previous walk.

        With `ends=(u, v)` the walk is oriented from u to v, raising
        `EndpointMismatch` if it connects other vertices.  With `host`
        every edge is checked against the host's current endpoints.
        """
        if ends is not None:
            u, v = ends
            if walk.start == u and walk.end == v:
                pass
            elif walk.start == v and walk.end == u:
                walk = walk.reversed()
            else:
                raise EndpointMismatch(f"walk {walk.start}..{walk.end} does not connect {u} and {v}")
        if host is not None:
            check_walk(host, walk)
        if key in self.walks:
            self.remove(key)
        self.walks[key] = walk
        self.econg.update(walk.edges)
        self.vcong.update(walk.vertices)
        self._lengths[len(walk.edges)] += 1
        for x in set(walk.vertices):
            self._by_vertex.setdefault(x, set()).add(key)

    def remove(self, key) -> Walk:
        walk = self.walks.pop(key)
        for counter, items in ((self.econg, walk.edges), (self.vcong, walk.vertices)):
            for x in items:
                counter[x] -= 1
                if counter[x] == 0:
                    del counter[x]
        n = len(walk.edges)
        self._lengths[n] -= 1
        if self._lengths[n] == 0:
            del self._lengths[n]
        for x in set(walk.vertices):
            bucket = self._by_vertex.get(x)
            if bucket is not None:
                bucket.discard(key)
                if not bucket:
                    del self._by_vertex[x]
        return walk

    def discard(self, key) -> None:
        if key in self.walks:
            self.remove(key)

    def keys_through(self, vertices: Iterable) -> set:
        """Keys whose stored walk visits any of `vertices`."""
        out: set = set()
        for x in vertices:
            bucket = self._by_vertex.get(x)
            if bucket:
                out |= bucket
        return out

    def length(self) -> int:
        return max(self._lengths, default=0)

    def max_econg(self) -> int:
        return max(self.econg.values(), default=0)

    def max_vcong(self) -> int:
        return max(self.vcong.values(), default=0)

    def recount(self):
        """Congestion and length recomputed from the stored walks."""
        econg: Counter = Counter()
        vcong: Counter = Counter()
        lengths: Counter = Counter()
        for w in self.walks.values():
            econg.update(w.edges)
            vcong.update(w.vertices)
            lengths[len(w.edges)] += 1
        return econg, vcong, lengths

    def caches_consistent(self) -> bool:
        econg, vcong, lengths = self.recount()
        return (
            +self.econg == econg
            and +self.vcong == vcong
            and +self._lengths == lengths
        )

    def validate(self, guest, host, keys=None) -> bool:
        """Every guest edge has a walk of live host edges joining its endpoints."""
        for e in guest.edges() if keys is None else keys:
            walk = self.walks.get(e)
            if walk is None:
                return False
            u, v = guest.endpoints(e)
            if walk_end(host, u, walk.edges) != v:
                return False
        return True

    def dump(self) -> str:
        return "".join(
            f"{k}: {','.join(map(str, w.edges))}\n" for k, w in sorted(self.walks.items())
        )


def walk_end(host, start, edges):
    """Follow `edges` from `start` in `host`; None if the walk breaks."""
    x = start
    for e in edges:
        if not host.has_edge(e):
            return None
        a, b = host.endpoints(e)
        if x == a:
            x = b
        elif x == b:
            x = a
        else:
            return None
    return x


def check_walk(host, walk: Walk) -> None:
    for i, e in enumerate(walk.edges):
        if not host.has_edge(e):
            raise MissingHostEdge(e)
        a, b = host.endpoints(e)
        x, y = walk.vertices[i], walk.vertices[i + 1]
        if not ((a == x and b == y) or (a == y and b == x)):
            raise EndpointMismatch(f"edge {e} joins {a},{b}, walk expects {x},{y}")


@dataclass(frozen=True)
class Projection:
    u_hat: int
    v_hat: int
    prefix: Walk
    suffix: Walk


def _advance(host, start, edges, S):
    # walk from `start` along `edges` until the first vertex in S
    verts = [start]
    x = start
    if x in S:
        return Walk((x,), ()), 0
    for i, e in enumerate(edges):
        x = host.other(e, x)
        verts.append(x)
        if x in S:
            return Walk(tuple(verts), tuple(edges[: i + 1])), i + 1
    return None, None


def project_edge(emb: Embedding, e, S, guest, host) -> Projection:
    """Project guest edge `e` onto the touched set `S`.

    The stored walk is replayed against the current host from both guest
    endpoints; each side stops at its first vertex of `S`.  The prefix runs
    u..û and the suffix v̂..v.
    """
    u, v = guest.endpoints(e)
    return project_walk(emb.walks[e], u, v, S, host, name=e)


def project_walk(walk: Walk, u, v, S, host, name=None) -> Projection:
    edges = walk.edges
    prefix, _ = _advance(host, u, edges, S)
    if prefix is None:
        raise NoIntersection(f"walk of edge {name} avoids the touched set")
    back, _ = _advance(host, v, edges[::-1], S)
    return Projection(prefix.end, back.end, prefix, back.reversed())


def compose(outer: Embedding, inner: Embedding) -> Embedding:
    """Replace every middle edge on an inner walk by its outer walk."""
    out = Embedding()
    for key, walk in inner.items():
        pos = walk.start
        acc = Walk.trivial(pos)
        for f in walk.edges:
            sub = outer.get(f)
            if sub is None:
                raise GraphMismatch(f"middle edge {f} has no outer walk")
            if sub.start == pos:
                pass
            elif sub.end == pos:
                sub = sub.reversed()
            else:
                raise GraphMismatch(f"outer walk of {f} does not touch {pos}")
            acc = acc + sub
            pos = acc.end
        out.embed(key, acc)
    return out
