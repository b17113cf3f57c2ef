"""Scaling table: build plus a mixed update stream per graph size."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from ..apsp import DynamicApsp
from .generators import generate


@dataclass
class BenchRow:
    n: int
    m: int
    updates: int
    build_s: float
    update_s: float
    total_s: float
    levels: int
    completed: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


def parse_sizes(text: str) -> list[int]:
    """Sizes like ``1024,2048``, ``2^10..2^13`` (doubling) or ``2^10``."""
    def one(tok: str) -> int:
        tok = tok.strip()
        if "^" in tok:
            base, exp = tok.split("^", 1)
            return int(base) ** int(exp)
        return int(tok)

    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = (one(x) for x in part.split("..", 1))
            n = lo
            while n <= hi:
                out.append(n)
                n *= 2
        elif part.strip():
            out.append(one(part))
    return out


# Desk-scale defaults: the scheduled k makes certification cost about n*k and
# the BST front-end multiplies the vertex count, so the bench pins both.
BENCH_DEFAULTS = {"k": 16, "f": 1}


def bench_one(n: int, seed: int = 0, use_bst: bool = False, deadline: float | None = None, **overrides) -> BenchRow:
    """Build plus n updates on a random 4n-edge graph.

    Stops early once `deadline` (a perf_counter value) passes; the row then has
    ``completed`` False and ``updates`` counts what was applied.
    """
    m = 4 * n
    params = {**BENCH_DEFAULTS, **overrides}
    g, stream = generate(f"random {n} {m} updates={m // 4} mix=ID maxlen=8", seed=seed)
    t0 = time.perf_counter()
    ap = DynamicApsp(g, use_bst=use_bst, **params)
    t1 = time.perf_counter()
    done = 0
    for up in stream:
        if deadline is not None and time.perf_counter() > deadline:
            break
        ap.apply_update(up)
        done += 1
    t2 = time.perf_counter()
    return BenchRow(n, m, done, t1 - t0, t2 - t1, t2 - t0, len(ap.levels()), done == len(stream))


def bench(sizes, seed: int = 0, use_bst: bool = False, emit=None, budget: float | None = None, max_growth: float | None = None, **overrides) -> list[BenchRow]:
    """One row per size.  With `budget` (seconds, whole table) or `max_growth`
    (per doubling), a size is cut off as soon as the limit is certainly
    exceeded and no larger sizes are run."""
    rows = []
    start = time.perf_counter()
    for n in sizes:
        limits = []
        if budget is not None:
            limits.append(start + budget)
        if max_growth is not None and rows:
            limits.append(time.perf_counter() + max_growth * rows[-1].total_s)
        row = bench_one(n, seed, use_bst, min(limits) if limits else None, **overrides)
        rows.append(row)
        if emit is not None:
            emit(row)
        if not row.completed:
            break
    return rows


def growth_factors(rows) -> list[float]:
    return [b.total_s / a.total_s if a.total_s > 0 else float("inf") for a, b in zip(rows, rows[1:])]


def format_table(rows) -> str:
    lines = [f"{'n':>7} {'m':>8} {'updates':>8} {'build_s':>9} {'update_s':>9} {'total_s':>9} {'levels':>6} {'done':>5}"]
    for r in rows:
        lines.append(f"{r.n:>7} {r.m:>8} {r.updates:>8} {r.build_s:>9.3f} {r.update_s:>9.3f} {r.total_s:>9.3f} {r.levels:>6} {'yes' if r.completed else 'no':>5}")
    return "\n".join(lines)
