"""Graph and stream files.

A graph file starts with an ``n m`` header followed by m ``u v len`` lines.
Stream files use the update line format of `dynapsp.dyngraph`.
"""
from __future__ import annotations

from ..dyngraph import DynGraph, format_update, parse_stream
from ..errors import InvalidSpec


def parse_graph(text: str) -> DynGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise InvalidSpec("graph file needs an 'n m' header")
    n, m = (int(x) for x in rows[0])
    if len(rows) - 1 != m:
        raise InvalidSpec(f"header says {m} edges, found {len(rows) - 1}")
    g = DynGraph(n)
    for row in rows[1:]:
        if len(row) not in (2, 3):
            raise InvalidSpec(f"bad edge line {' '.join(row)!r}")
        u, v = int(row[0]), int(row[1])
        length = int(row[2]) if len(row) == 3 else 1
        g.add_edge(u, v, length)
    return g


def format_graph(g: DynGraph) -> str:
    lines = [f"{g.num_vertices()} {g.num_edges()}"]
    for e in sorted(g.edges()):
        u, v = g.endpoints(e)
        lines.append(f"{u} {v} {g.length(e)}")
    return "\n".join(lines) + "\n"


def read_graph(path) -> DynGraph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(path, g: DynGraph) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def read_stream(path) -> list:
    with open(path) as fh:
        return parse_stream(fh)


def write_stream(path, stream) -> None:
    with open(path, "w") as fh:
        for up in stream:
            fh.write(format_update(up) + "\n")
