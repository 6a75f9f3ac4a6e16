"""Command-line entry point for the experiment harness.

Subcommands mirror the batch API: ``levels``, ``classify``, ``multiplicity``
and ``sweep``.  Graphs are named by builder shorthand (``star3``,
``bigcircles8``, ``gn6k2``, ``loopline10-10-10``, ``line``, ``halfline``,
``hgraph``, ``loop2``) or by a path to a graph-spec text file.
"""
from __future__ import annotations

import argparse
import os
import re
import sys

from .experiments import (
    cmd_classify,
    cmd_levels,
    cmd_multiplicity,
    cmd_sweep,
    ordering_violations,
    write_records,
)
from .functionals import ProblemParams
from .graphs import parse_graphspec
from .solvers import SolverOptions
from .zoo import (
    big_circles,
    g_n,
    h_graph,
    half_line_graph,
    line_graph,
    loops_on_line,
    single_loop,
    star_graph,
    tilde_g_n,
)

_BUILDERS = (
    (r"line", lambda m: line_graph()),
    (r"halfline", lambda m: half_line_graph()),
    (r"hgraph", lambda m: h_graph()),
    (r"star(\d+)", lambda m: star_graph(int(m.group(1)))),
    (r"bigcircles(\d+)", lambda m: big_circles(int(m.group(1)))),
    (r"gn(\d+)k(\d+)", lambda m: g_n(int(m.group(1)), int(m.group(2)))),
    (r"tildegn(\d+)k(\d+)", lambda m: tilde_g_n(int(m.group(1)), int(m.group(2)))),
    (r"loop([0-9.]+)?", lambda m: single_loop(float(m.group(1) or 2.0))),
    (r"loopline([0-9.-]+)",
     lambda m: loops_on_line([float(x) for x in m.group(1).split("-")])),
)


def resolve_graph(token: str):
    """Builder shorthand or a path to a graph-spec file."""
    if os.path.exists(token):
        with open(token, encoding="utf-8") as fh:
            return parse_graphspec(fh.read())
    for pattern, build in _BUILDERS:
        m = re.fullmatch(pattern, token)
        if m:
            return build(m)
    names = ", ".join(p for p, _ in _BUILDERS)
    raise SystemExit(f"unknown graph {token!r}; use a spec file or one of: {names}")


def _common(sub):
    sub.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sub.add_argument("--p", type=float, default=4.0)
    sub.add_argument("--h", type=float, default=0.01)
    sub.add_argument("--trunc", type=float, default=20.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out-dir", default="out")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nlsgraph",
        description="Level estimates and localized solutions of the stationary "
                    "NLS equation on metric graphs.")
    subs = ap.add_subparsers(dest="cmd", required=True)

    lv = subs.add_parser("levels", help="ground-state / least-action estimates")
    lv.add_argument("--graph", required=True)
    lv.add_argument("--min-len", type=float, default=0.5)
    lv.add_argument("--allow-compact", action="store_true",
                    help="waive the admissible-class check (compact graphs)")
    _common(lv)

    cl = subs.add_parser("classify", help="run an attainment-case signature")
    cl.add_argument("--case", required=True, choices=("A1", "A2", "B1", "B2"))
    cl.add_argument("--sizes", default=None,
                    help="comma-separated family sizes (default per case)")
    _common(cl)

    mu = subs.add_parser("multiplicity", help="edge-localized solution scan")
    mu.add_argument("--graph", required=True)
    mu.add_argument("--min-len", type=float, default=0.5)
    _common(mu)

    sw = subs.add_parser("sweep", help="edge-length attainment sweep")
    sw.add_argument("--lengths", default="1:12",
                    help="integer range lo:hi for the base sweep")
    _common(sw)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    pp = ProblemParams(args.lam, args.p)
    opts = SolverOptions(h=args.h, trunc=args.trunc, seed=args.seed)

    if args.cmd == "levels":
        g = resolve_graph(args.graph)
        records = cmd_levels(g, pp, opts, min_len=args.min_len,
                             allow_compact=args.allow_compact,
                             workers=args.workers)
        stem = f"levels_{g.name}"
    elif args.cmd == "classify":
        sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes else None
        records = cmd_classify(args.case, pp, opts, sizes=sizes,
                               workers=args.workers)
        stem = f"classify_{args.case}"
    elif args.cmd == "multiplicity":
        g = resolve_graph(args.graph)
        records, paths = cmd_multiplicity(g, pp, args.min_len, opts,
                                          out_dir=args.out_dir,
                                          workers=args.workers)
        stem = f"multiplicity_{g.name}"
        for path in paths:
            print("wrote", path)
    else:
        lo, hi = (int(x) for x in args.lengths.split(":"))
        records = cmd_sweep(pp, opts, lengths=tuple(range(lo, hi + 1)),
                            workers=args.workers)
        stem = "sweep"

    path = write_records(records, args.out_dir, stem, args.format)
    print("wrote", path)
    for r in records:
        print(f"{r.graph:>16} {r.tag:<18} {r.value:+.6f}  tol={r.tol:g}  "
              f"[{r.status}]  {r.params}")
    bad = ordering_violations(records)
    for line in bad:
        print("ordering violation:", line, file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
