"""Oracle-backed checks for a running `DynamicApsp`."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..oracle import distance_matrix, replay_walk

EPS = 1e-9


@dataclass
class Report:
    checked_pairs: int = 0
    violations: list = field(default_factory=list)

    def add(self, name: str, detail: str = "") -> None:
        self.violations.append((name, detail))

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> list[str]:
        return sorted({name for name, _ in self.violations})


def verify_cadence(n: int) -> int:
    """Check every update on small graphs, every 32nd otherwise."""
    return 1 if n <= 128 else 32


def check_soundness(ap, report: Report, vertices=None) -> None:
    """Estimates never undercut exact distances and are finite iff connected."""
    G = ap.G
    verts, est = ap.dist_matrix(vertices)
    index, exact = distance_matrix(G, sources=verts)
    exact = exact[:, [index[x] for x in verts]]
    conn = np.isfinite(exact)
    under = conn & ~(est >= exact - EPS)
    lost = conn & ~np.isfinite(est)
    phantom = ~conn & np.isfinite(est)
    report.checked_pairs += int(conn.sum())
    for name, mask in (("soundness", under), ("connectivity", lost | phantom)):
        if mask.any():
            i, j = (int(x) for x in np.argwhere(mask)[0])
            report.add(name, f"pair ({verts[i]}, {verts[j]}): estimate {est[i, j]} exact {exact[i, j]}")


def check_clusters(ap, report: Report) -> None:
    """Pairs inside a root cluster (or to the root pivot) are answered exactly.

    Exactness is measured in the graph the root level maintains, which is
    the input graph itself when the degree reduction is off.
    """
    root = ap.root
    if root.base:
        return
    users = sorted(ap.G.vertices())
    node_of = {u: ap.node(u) for u in users}
    user_of = {x: u for u, x in node_of.items()}
    index, exact = distance_matrix(root.G, sources=list(node_of.values()))
    row = {x: i for i, x in enumerate(node_of.values())}
    for u in users:
        rec = root.vs.records[node_of[u]]
        for x, d in rec.dist.items():
            if not (d < rec.radius or x == rec.pivot):
                continue
            v = user_of.get(x)
            if v is None:
                continue
            want = exact[row[node_of[u]], index[x]] / ap.scale
            got = ap.dist(u, v)
            if got is None or abs(got - want) > EPS:
                report.add("cluster-exact", f"pair ({u}, {v}): estimate {got} exact {want}")
                return


def check_levels(ap, report: Report) -> None:
    """Degree guards, reduce-degree budgets, pivot budget, cluster sizes,
    back-walk soundness and spanner embeddings on every level."""
    for name in ap.check_invariants():
        report.add(name)
    for lv in ap.levels():
        if lv.base:
            continue
        vs = lv.vs
        d = lv.depth
        if len(vs.A) > vs.A0 + 2 * vs.updates:
            report.add(f"pivot-budget@{d}", f"|A|={len(vs.A)} A0={vs.A0} updates={vs.updates}")
        cap = vs.tau * vs.k
        big = [u for u, r in vs.records.items() if len(r.cluster()) > cap]
        if big:
            report.add(f"cluster-size@{d}", f"vertex {big[0]} exceeds {cap}")
        bad = vs.soundness_violations()
        if bad:
            report.add(f"vs-soundness@{d}", f"contracted edge {bad[0]}")
        if not lv.spanner.validate():
            report.add(f"spanner-embedding@{d}")


def check_paths(ap, pairs, report: Report) -> None:
    """Each returned path is a walk in G between the pair, no longer than the estimate."""
    G = ap.G
    for u, v in pairs:
        d = ap.dist(u, v)
        if d is None:
            continue
        p = ap.path(u, v)
        end = replay_walk(G, u, p)
        length = sum(G.length(e) for e in p)
        if end != v or length > d + EPS:
            report.add("path-consistency", f"pair ({u}, {v}): end {end} length {length} estimate {d}")


def full_check(ap, report: Report | None = None, pairs=()) -> Report:
    report = report or Report()
    check_soundness(ap, report)
    check_clusters(ap, report)
    check_levels(ap, report)
    check_paths(ap, pairs, report)
    return report
