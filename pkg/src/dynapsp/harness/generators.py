"""Seeded graph and update-stream generators.

A generator spec is a whitespace-separated string: a kind, its positional
arguments, then optional key=value options, e.g. ``random 64 128 seed=7
updates=200 mix=IDS maxlen=4``.

Graph kinds: ``path n``, ``grid a b``, ``random n m``, ``star n``.
Stream kinds wrap a graph spec: ``delete-spanner-edges <graph spec>`` and
``split-heavy <graph spec>``.  Plain graph kinds produce a mixed stream of
``updates`` operations drawn from ``mix`` (letters I, D, S, V).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dyngraph import DeleteEdge, DynGraph, InsertEdge, InsertVertex, SplitVertex
from ..errors import InvalidSpec

GRAPH_KINDS = ("path", "grid", "random", "star")
STREAM_KINDS = ("delete-spanner-edges", "split-heavy")
OPTIONS = ("seed", "updates", "mix", "maxlen")


@dataclass
class GenSpec:
    kind: str
    args: list[int]
    seed: int = 0
    updates: int = 0
    mix: str = "IDS"
    maxlen: int = 1
    stream: str | None = None
    extra: dict = field(default_factory=dict)


def rng_for(seed: int) -> np.random.Generator:
    """The single PRNG used by every generator (PCG64, 64-bit seed)."""
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


def parse_spec(text: str, seed: int | None = None) -> GenSpec:
    words = text.split()
    if not words:
        raise InvalidSpec("empty generator spec")
    stream = None
    if words[0] in STREAM_KINDS:
        stream = words[0]
        words = words[1:]
        if not words:
            raise InvalidSpec(f"{stream} needs a graph spec")
    kind, rest = words[0], words[1:]
    if kind not in GRAPH_KINDS:
        raise InvalidSpec(f"unknown generator {kind!r}")
    args: list[int] = []
    opts: dict = {}
    for w in rest:
        if "=" in w:
            key, val = w.split("=", 1)
            if key not in OPTIONS:
                raise InvalidSpec(f"unknown option {key!r}")
            opts[key] = val
        else:
            try:
                args.append(int(w))
            except ValueError:
                raise InvalidSpec(f"bad argument {w!r}") from None
    want = {"path": 1, "grid": 2, "random": 2, "star": 1}[kind]
    if len(args) != want:
        raise InvalidSpec(f"{kind} takes {want} arguments, got {len(args)}")
    if any(a < 0 for a in args):
        raise InvalidSpec("arguments must be non-negative")
    spec = GenSpec(kind, args, stream=stream)
    try:
        spec.seed = int(opts.get("seed", 0))
        spec.updates = int(opts.get("updates", 0))
        spec.maxlen = int(opts.get("maxlen", 1))
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from None
    spec.mix = opts.get("mix", "IDS").upper()
    if not spec.mix or set(spec.mix) - set("IDSV"):
        raise InvalidSpec(f"bad mix {spec.mix!r}")
    if spec.maxlen < 1:
        raise InvalidSpec("maxlen must be at least 1")
    if seed is not None:
        spec.seed = seed
    return spec


def _length(rng, maxlen) -> int:
    return 1 if maxlen == 1 else int(rng.integers(1, maxlen + 1))


def make_graph(spec: GenSpec, rng) -> DynGraph:
    kind, args = spec.kind, spec.args
    if kind == "path":
        (n,) = args
        g = DynGraph(n)
        for i in range(n - 1):
            g.add_edge(i, i + 1, _length(rng, spec.maxlen))
        return g
    if kind == "star":
        (n,) = args
        g = DynGraph(n + 1)
        for i in range(1, n + 1):
            g.add_edge(0, i, _length(rng, spec.maxlen))
        return g
    if kind == "grid":
        a, b = args
        g = DynGraph(a * b)
        for r in range(a):
            for c in range(b):
                v = r * b + c
                if c + 1 < b:
                    g.add_edge(v, v + 1, _length(rng, spec.maxlen))
                if r + 1 < a:
                    g.add_edge(v, v + b, _length(rng, spec.maxlen))
        return g
    n, m = args
    if n < 2 and m > 0:
        raise InvalidSpec("random graphs with edges need n >= 2")
    g = DynGraph(n)
    for _ in range(m):
        u, v = rng.choice(n, size=2, replace=False)
        g.add_edge(int(u), int(v), _length(rng, spec.maxlen))
    return g


def _random_update(g: DynGraph, rng, mix, maxlen):
    verts = sorted(g.vertices())
    edges = sorted(g.edges())
    for _ in range(8):
        op = mix[int(rng.integers(len(mix)))]
        if op == "D" and edges:
            return DeleteEdge(edges[int(rng.integers(len(edges)))])
        if op == "I" and len(verts) >= 2:
            u, v = rng.choice(len(verts), size=2, replace=False)
            return InsertEdge(verts[int(u)], verts[int(v)], _length(rng, maxlen))
        if op == "V":
            return InsertVertex()
        if op == "S" and verts:
            v = verts[int(rng.integers(len(verts)))]
            nbrs = sorted(g.neighbors(v))
            if len(nbrs) >= 2:
                take = int(rng.integers(1, len(nbrs)))
                side = rng.choice(len(nbrs), size=take, replace=False)
                return SplitVertex(v, frozenset(nbrs[int(i)] for i in side))
    return InsertVertex()


def mixed_stream(g: DynGraph, count: int, rng, mix="IDS", maxlen=1) -> list:
    scratch = g.copy(counters=False)
    out = []
    for _ in range(count):
        up = _random_update(scratch, rng, mix, maxlen)
        scratch.apply_update(up)
        out.append(up)
    return out


def delete_spanner_edges(g: DynGraph, count: int) -> list:
    """Deletions that always hit an edge of the current dynamic spanner."""
    from ..spanner.weighted import WeightedSpanner

    scratch = g.copy(counters=False)
    sp = WeightedSpanner(scratch)
    out = []
    for _ in range(count):
        edges = sorted(sp.edges())
        if not edges:
            break
        up = DeleteEdge(edges[0])
        sp.update(scratch.apply_update(up))
        out.append(up)
    return out


def split_heavy(g: DynGraph, count: int) -> list:
    """Repeatedly split a maximum-degree vertex in half."""
    scratch = g.copy(counters=False)
    out = []
    for _ in range(count):
        v = max(sorted(scratch.vertices()), key=scratch.degree, default=None)
        nbrs = sorted(scratch.neighbors(v)) if v is not None else []
        if len(nbrs) < 2:
            break
        up = SplitVertex(v, frozenset(nbrs[: len(nbrs) // 2]))
        scratch.apply_update(up)
        out.append(up)
    return out


def generate(text: str, seed: int | None = None) -> tuple[DynGraph, list]:
    """Build the graph and update stream described by `text`."""
    spec = parse_spec(text, seed)
    rng = rng_for(spec.seed)
    g = make_graph(spec, rng)
    if spec.stream == "delete-spanner-edges":
        stream = delete_spanner_edges(g, spec.updates or g.num_edges())
    elif spec.stream == "split-heavy":
        stream = split_heavy(g, spec.updates or g.num_vertices())
    else:
        stream = mixed_stream(g, spec.updates, rng, spec.mix, spec.maxlen)
    return g, stream
