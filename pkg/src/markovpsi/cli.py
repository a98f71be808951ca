"""Command-line interface.

    markovpsi verify --family ring --n 4 --mode symbolic --checks all
    markovpsi verify --family complete --n 5 --mode pit --trials 20 --claim chapuy
    markovpsi show r-matrix --family complete --n 3
    markovpsi lift --family ring --n 4 --emit dot
    markovpsi trees --family ring --n 4 --root 3
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import lift as lift_mod
from .arborescence import enumerate_arborescences, weight_poly
from .markov_graph import GraphError
from .polyring import VarId, format_poly
from .psi import PsiError
from .report import (
    CHECK_NAMES,
    DEFAULT_CUTOFF,
    EXIT_FAILED,
    EXIT_INFEASIBLE,
    ConfigError,
    RunConfig,
    aliases_for,
    default_prime,
    format_matrix,
    letter_order,
    run_verify,
    write_report,
)

log = logging.getLogger("markovpsi")


def _add_graph_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("graph")
    g.add_argument("--family", choices=["ring", "complete"], default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--graph", dest="graph_file", default=None,
                   help="file: first line n, then one 'i j' edge per line")


def _parse_var(text: str) -> VarId:
    t = text.strip()
    if t.startswith("q") and "_" in t:
        i, j = t[1:].split("_")
    else:
        i, j = t.split(",")
    return VarId(int(i), int(j))


def _parse_exponents(text: str) -> dict[int, int]:
    out = {}
    for part in text.split(","):
        k, e = part.split(":")
        out[int(k)] = int(e)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markovpsi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="compute Psi and verify its factorization")
    _add_graph_args(v)
    v.add_argument("--mode", choices=["symbolic", "pit", "auto"], default="auto")
    v.add_argument("--claim", choices=["ring", "chapuy", "custom"], default=None)
    v.add_argument("--exponents", default=None, help="custom claim, e.g. '2:3,3:2'")
    v.add_argument("--witnesses", choices=["first", "all"], default="first")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--prime", type=int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF,
                   help="largest |T| attempted symbolically")
    v.add_argument("--specialize", default=None,
                   help="comma list of variables set to 1, e.g. 'q1_2,q3_4'")
    v.add_argument("--checks", default="all",
                   help=f"'all', 'none' or a comma list of {', '.join(CHECK_NAMES)}")
    v.add_argument("--format", choices=["human", "json"], default="human")
    v.add_argument("--output", "-o", default=None, help="write the report to this file")
    v.add_argument("--figure-dir", default=None, help="render PNG figures into this directory")

    s = sub.add_parser("show", help="print trees, the lifted graph or the R matrix")
    s.add_argument("what", choices=["trees", "lift", "r-matrix", "q-matrix"])
    _add_graph_args(s)
    s.add_argument("--root", type=int, default=None)
    s.add_argument("--emit", choices=["text", "dot", "json"], default="text")
    s.add_argument("--order", choices=["auto", "lex", "letters"], default="auto")
    s.add_argument("--figure", default=None, help="write a PNG of the lifted graph")

    lp = sub.add_parser("lift", help="export the lifted graph T")
    _add_graph_args(lp)
    lp.add_argument("--emit", choices=["text", "dot", "json"], default="dot")
    lp.add_argument("--figure", default=None)

    tp = sub.add_parser("trees", help="list covering trees with their weights")
    _add_graph_args(tp)
    tp.add_argument("--root", type=int, default=None)
    return parser


def _config(args) -> RunConfig:
    if args.graph_file is None and (args.family is None or args.n is None):
        raise ConfigError("give --family and --n, or --graph")
    cfg = RunConfig(family=args.family, n=args.n, graph_file=args.graph_file)
    if args.command == "verify":
        cfg.mode = args.mode
        cfg.claim = args.claim
        if args.exponents:
            cfg.custom_claim = _parse_exponents(args.exponents)
            cfg.claim = cfg.claim or "custom"
        cfg.witnesses = args.witnesses
        cfg.trials = args.trials
        cfg.prime = args.prime if args.prime is not None else default_prime()
        cfg.seed = args.seed
        cfg.cutoff = args.cutoff
        if args.specialize:
            cfg.specialize = tuple(sorted(_parse_var(x) for x in args.specialize.split(",")))
        if args.checks == "all":
            cfg.checks = CHECK_NAMES
        elif args.checks == "none":
            cfg.checks = ()
        else:
            names = tuple(c.strip() for c in args.checks.split(","))
            bad = [c for c in names if c not in CHECK_NAMES]
            if bad:
                raise ConfigError(f"unknown checks: {', '.join(bad)}")
            cfg.checks = names
        cfg.output = args.format
        cfg.figure_dir = args.figure_dir
        if cfg.trials < 1:
            raise ConfigError("--trials must be >= 1")
    return cfg


def _show_trees(g, root, names) -> str:
    roots = [root] if root else list(g.vertices)
    lines = []
    lc = lift_mod.build_lift(g) if g.is_ring() else None
    ring_idx = {v: k for k, v in lift_mod.ring_tree_index(lc).items()} if lc else {}
    for r in roots:
        for t in enumerate_arborescences(g, r):
            tag = ""
            if lc is not None:
                tag = "[%d,%d] " % ring_idx[lc.index[t]]
            edges = " ".join(f"{v}->{w}" for v, w in t.out_edge)
            lines.append(f"root {r}: {tag}{format_poly(weight_poly(g, t), names)}  ({edges})")
    return "\n".join(lines) + "\n"


def _show(args, cfg: RunConfig) -> str:
    g = cfg.build_graph()
    names = aliases_for(g)
    what = args.what if args.command == "show" else args.command
    if what == "trees":
        return _show_trees(g, args.root, names)
    if what == "q-matrix":
        from .markov_graph import rate_matrix

        return format_matrix(rate_matrix(g), names)
    lc = lift_mod.build_lift(g)
    if what == "r-matrix":
        order = getattr(args, "order", "auto")
        use_letters = order == "letters" or (order == "auto" and g.name == "complete" and g.n == 3)
        perm = letter_order(lc) if use_letters else None
        return format_matrix(lift_mod.r_matrix(lc, perm), names)
    # lift
    if args.figure:
        from .plotting import plot_lift

        plot_lift(lc, args.figure, names)
    if args.emit == "dot":
        return lift_mod.to_dot(lc, names)
    if args.emit == "json":
        return lift_mod.to_json(lc)
    lines = []
    for tr in lc.transitions:
        lines.append(f"{tr.source} -> {tr.target} [{tr.label}]")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.command == "verify":
            report, code = run_verify(cfg)
            text = write_report(report, cfg.output, args.output)
            if not args.output:
                sys.stdout.write(text)
            return code
        sys.stdout.write(_show(args, cfg))
        return 0
    except (ConfigError, GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PsiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
