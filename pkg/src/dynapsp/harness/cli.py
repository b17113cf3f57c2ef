"""Command-line entry point.

    dynapsp build <graph> [config]
    dynapsp run <graph> <stream> [config]
    dynapsp query <u> <v> --graph G [--stream S] [--config C]
    dynapsp verify <graph> <stream> [config]
    dynapsp bench <sizes>
    dynapsp experiment-recourse <graph> <stream>
    dynapsp generate <spec> <graph-out> <stream-out>

Metrics go to stdout as JSON lines unless --out is given.  Any invariant
violation exits with status 1 and names the invariant on stderr.
"""
from __future__ import annotations

import argparse
import sys
import time

from ..apsp import DynamicApsp
from ..errors import DynApspError, InvariantViolation
from .bench import bench, format_table, growth_factors, parse_sizes
from .config import RunConfig, load_config
from .generators import generate
from .io import read_graph, read_stream, write_graph, write_stream
from .metrics import Metrics
from .verify import Report, check_levels, full_check, verify_cadence
from .warmup import experiment_recourse


def _build(graph, cfg: RunConfig) -> DynamicApsp:
    return DynamicApsp(graph, use_bst=cfg.bst, **cfg.overrides())


def _header(cfg: RunConfig, ap: DynamicApsp | None = None, **extra) -> dict:
    head = {"config": cfg.as_dict(), "seed": cfg.seed, **extra}
    if ap is not None:
        head["constants"] = ap.params.as_dict()
    return head


def _fail(report: Report, step: int) -> int:
    names = ", ".join(report.names())
    print(f"invariant violated at update {step}: {names}", file=sys.stderr)
    for name, detail in report.violations[:5]:
        print(f"  {name}: {detail}", file=sys.stderr)
    return 1


def cmd_build(args) -> int:
    cfg = load_config(args.config)
    g = read_graph(args.graph)
    t0 = time.perf_counter()
    ap = _build(g, cfg)
    with Metrics(args.out, _header(cfg, ap)) as out:
        report = Report()
        check_levels(ap, report)
        out.emit("build", seconds=time.perf_counter() - t0, levels=ap.root.level_sizes(), violations=report.names())
    return 0 if report.ok else _fail(report, 0)


def _probe_pairs(g, count: int = 4) -> list:
    verts = sorted(g.vertices())
    return [(verts[i], verts[-1 - i]) for i in range(min(count, len(verts) // 2))]


def _replay(args, cfg: RunConfig, verify: bool) -> int:
    g = read_graph(args.graph)
    stream = read_stream(args.stream)
    ap = _build(g, cfg)
    every = cfg.verify_every or verify_cadence(g.num_vertices())
    with Metrics(args.out, _header(cfg, ap, updates=len(stream))) as out:
        t0 = time.perf_counter()
        for step, up in enumerate(stream, 1):
            ap.apply_update(up)
            if verify and (step % every == 0 or step == len(stream)):
                report = full_check(ap, pairs=_probe_pairs(ap.G))
                out.emit("verify", step=step, pairs=report.checked_pairs, violations=report.names())
                if not report.ok:
                    return _fail(report, step)
        out.emit(
            "done",
            updates=len(stream),
            seconds=time.perf_counter() - t0,
            levels=ap.root.level_sizes(),
            builds=[lv.stats.builds for lv in ap.levels()],
        )
        if verify and not stream:
            report = full_check(ap)
            if not report.ok:
                return _fail(report, 0)
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    return _replay(args, cfg, cfg.verify)


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    cfg.verify_every = 1
    return _replay(args, cfg, True)


def cmd_query(args) -> int:
    cfg = load_config(args.config)
    g = read_graph(args.graph)
    ap = _build(g, cfg)
    if args.stream:
        for up in read_stream(args.stream):
            ap.apply_update(up)
    d = ap.dist(args.u, args.v)
    if d is None:
        print("inf")
        return 0
    path = ap.path(args.u, args.v)
    print(f"{d:g}")
    print(" ".join(str(e) for e in path))
    return 0


def cmd_bench(args) -> int:
    sizes = parse_sizes(args.sizes)
    overrides = {}
    if args.k is not None:
        overrides["k"] = args.k
    if args.f is not None:
        overrides["f"] = args.f
    head = {"sizes": sizes, "seed": args.seed, "bst": args.bst, "budget": args.budget, "max_growth": args.max_growth, **overrides}
    with Metrics(args.out, head) as out:
        rows = bench(
            sizes,
            seed=args.seed,
            use_bst=args.bst,
            emit=lambda r: out.emit("bench", **r.as_dict()),
            budget=args.budget,
            max_growth=args.max_growth,
            **overrides,
        )
        out.emit("growth", factors=growth_factors(rows))
    print(format_table(rows), file=sys.stderr)
    return 0


def cmd_recourse(args) -> int:
    g = read_graph(args.graph)
    stream = read_stream(args.stream)
    report = experiment_recourse(g, stream, gamma_ds=args.gamma_ds, gamma_vs=args.gamma_vs)
    with Metrics(args.out, {"seed": args.seed, "gamma_ds": args.gamma_ds, "gamma_vs": args.gamma_vs}) as out:
        out.emit("recourse", **report.as_dict())
    return 0


def cmd_generate(args) -> int:
    g, stream = generate(args.spec, seed=args.seed)
    write_graph(args.graph_out, g)
    write_stream(args.stream_out, stream)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynapsp", description="Fully-dynamic approximate shortest paths.")
    p.add_argument("--out", default=None, help="metrics file (JSON lines); default stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="build the hierarchy and report level sizes")
    s.add_argument("graph")
    s.add_argument("config", nargs="?")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("run", help="replay a stream, verifying when verify=on")
    s.add_argument("graph")
    s.add_argument("stream")
    s.add_argument("config", nargs="?")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("verify", help="replay a stream checking every invariant after each update")
    s.add_argument("graph")
    s.add_argument("stream")
    s.add_argument("config", nargs="?")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("query", help="distance estimate and path between two vertices")
    s.add_argument("u", type=int)
    s.add_argument("v", type=int)
    s.add_argument("--graph", required=True)
    s.add_argument("--stream")
    s.add_argument("--config")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("bench", help="scaling table, e.g. 2^10..2^13")
    s.add_argument("sizes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k", type=int, default=None, help="pivot ratio (default 16)")
    s.add_argument("--f", type=int, default=None, help="sparsifier stretch factor (default 1)")
    s.add_argument("--bst", action="store_true", help="add the degree-reducing front-end")
    s.add_argument("--budget", type=float, default=None, help="stop once the table exceeds this many seconds")
    s.add_argument("--max-growth", type=float, default=None, help="stop once a doubling exceeds this factor")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("experiment-recourse", help="pivot-set recourse of the layered stack")
    s.add_argument("graph")
    s.add_argument("stream")
    s.add_argument("--gamma-ds", type=float, default=8)
    s.add_argument("--gamma-vs", type=float, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_recourse)

    s = sub.add_parser("generate", help="write a generated graph and stream")
    s.add_argument("spec")
    s.add_argument("graph_out")
    s.add_argument("stream_out")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc.name} {exc.detail}".rstrip(), file=sys.stderr)
        return 1
    except DynApspError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
