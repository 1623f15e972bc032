"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 not identifiable / connected or not
certified, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import counterexamples as cx
from .estimand import EvaluationError, evaluate_table, render, to_json
from .graph import GraphError, d_separated, edge_surgery, find_active_path, load_graph, parse_graph, render_path
from .identify import Decomposition, Identifiable, Query, QueryError, identify
from .semlab import (
    DegenerateSelectionError,
    SemError,
    empirical_table,
    random_sem,
    read_csv,
    sample_subpopulation,
    write_csv,
)

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_DEGENERATE = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _names(values) -> list[str]:
    out = []
    for v in values or ():
        out.extend(p.strip() for p in v.split(",") if p.strip())
    return out


def sem_seeds(seed: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Seeds for the CPT draw and for the sampler, both derived from `seed`."""
    return tuple(np.random.SeedSequence(seed).spawn(2))


def _load(args):
    return load_graph(args.graph, selection=args.selection)


def _query(args) -> Query:
    return Query(_names(args.treatment), _names(args.outcome))


def _identify_payload(g, res) -> dict:
    dec: Decomposition = res.decomposition
    out = {
        "identifiable": res.identifiable,
        "x1": list(g.sort_nodes(dec.x1)),
        "x2": list(g.sort_nodes(dec.x2)),
    }
    if isinstance(res, Identifiable):
        out["estimand"] = to_json(res.estimand)
        out["text"] = render(res.estimand, "text")
    else:
        out["witness"] = list(res.witness)
        out["witness_text"] = render_path(g, res.witness)
    return out


def cmd_identify(args, out) -> int:
    g = _load(args)
    q = _query(args)
    res = identify(g, q)
    if args.format == "json":
        print(json.dumps(_identify_payload(g, res)), file=out)
    elif isinstance(res, Identifiable):
        print(render(res.estimand, args.format), file=out)
    else:
        print("NOT_IDENTIFIABLE", file=out)
        print("witness: " + render_path(g, res.witness), file=out)
    return EXIT_OK if res.identifiable else EXIT_NEGATIVE


def cmd_estimate(args, out) -> int:
    g = _load(args)
    q = _query(args)
    res = identify(g, q)
    if not res.identifiable:
        print("NOT_IDENTIFIABLE", file=out)
        print("witness: " + render_path(g, res.witness), file=out)
        return EXIT_NEGATIVE
    try:
        header, data = read_csv(args.data)
    except OSError as exc:
        raise InputError(str(exc)) from None
    if len(set(header)) != len(header):
        raise InputError("duplicate column names")
    missing = [v for v in g.observed if v not in header]
    if missing:
        raise InputError(f"data lacks columns {missing}")
    if len(data) == 0:
        raise InputError(f"{args.data}: no data rows")
    cols = [header.index(v) for v in g.observed]
    cards = {v: args.card for v in g.observed} if args.card else None
    if cards and (data[:, cols] >= args.card).any():
        raise InputError(f"category codes must be below --card {args.card}")
    table = empirical_table(data[:, cols], g.observed, cards)
    xs, ys = g.sort_nodes(q.treatment), g.sort_nodes(q.outcome)
    est = evaluate_table(res.estimand, table, xs, ys)
    _print_table(est, xs, ys, args.format, out)
    return EXIT_OK


def _print_table(est, xs, ys, fmt, out):
    cells = []
    for idx in itertools.product(*(range(n) for n in est.shape)):
        assign = dict(zip(xs + ys, idx))
        cells.append(
            {"x": {v: assign[v] for v in xs}, "y": {v: assign[v] for v in ys}, "value": float(est[idx])}
        )
    if fmt == "json":
        print(json.dumps({"x_vars": list(xs), "y_vars": list(ys), "cells": cells}), file=out)
        return
    for c in cells:
        lhs = ",".join(f"{v}={a}" for v, a in c["y"].items())
        rhs = ",".join(f"{v}={a}" for v, a in c["x"].items())
        if fmt == "latex":
            print(f"P^{{s}}_{{{rhs}}}({lhs}) = {c['value']:.6f}", file=out)
        else:
            print(f"P_{{{rhs}}}({lhs} | S=1) = {c['value']:.6f}", file=out)


def cmd_simulate(args, out) -> int:
    g = _load(args)
    if args.rows < 1:
        raise InputError("--rows must be positive")
    if args.card < 1:
        raise InputError("--card must be positive")
    sem_seed, sample_seed = sem_seeds(args.seed)
    sem = random_sem(g, sem_seed, args.card, args.concentration)
    data = sample_subpopulation(sem, args.rows, sample_seed)
    if args.out:
        write_csv(args.out, data, g.observed)
    else:
        write_csv(None, data, g.observed, stream=out)
    return EXIT_OK


def cmd_dsep(args, out) -> int:
    g = parse_graph(Path(args.graph).read_text())
    x, y, z = _names(args.x), _names(args.y), _names(args.given)
    if not x or not y:
        raise InputError("--x and --y are required")
    h = edge_surgery(g, remove_incoming=_names(args.remove_in), remove_outgoing=_names(args.remove_out))
    if d_separated(h, x, y, z):
        print("SEPARATED", file=out)
        return EXIT_OK
    print("CONNECTED", file=out)
    print("witness: " + render_path(h, find_active_path(h, x, y, z)), file=out)
    return EXIT_NEGATIVE


def cmd_falsify(args, out) -> int:
    if args.k < 1 or args.m < 1:
        raise InputError("--k and --m must be positive integers")
    rep = cx.falsification_report(args.k, args.m, args.family, n_points=args.points, seed=args.seed)
    print(rep.to_json(), file=out)
    return EXIT_OK if rep.certified else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sid", description="Causal effect identification from sub-population data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_args(sp, selection=True):
        sp.add_argument("graph", help="graph file")
        if selection:
            sp.add_argument("--selection", default="S", help="selection node name (default S)")

    def query_args(sp):
        sp.add_argument("--treatment", "-x", action="append", required=True, help="treatment names")
        sp.add_argument("--outcome", "-y", action="append", required=True, help="outcome names")

    fmt = dict(choices=("text", "latex", "json"), default="text")

    sp = sub.add_parser("identify", help="decide identifiability and print the estimand")
    graph_args(sp)
    query_args(sp)
    sp.add_argument("--format", **fmt)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("estimate", help="plug-in estimate of the effect from sub-population CSV")
    graph_args(sp)
    query_args(sp)
    sp.add_argument("--data", required=True, help="CSV with a header of node names")
    sp.add_argument("--card", type=int, default=None, help="common cardinality (default: from data)")
    sp.add_argument("--format", **fmt)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("simulate", help="sample sub-population rows from a random discrete SEM")
    graph_args(sp)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--rows", type=int, default=10_000)
    sp.add_argument("--card", type=int, default=2)
    sp.add_argument("--concentration", type=float, default=1.0)
    sp.add_argument("--out", default=None, help="output CSV (default stdout)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("dsep", help="d-separation query with optional edge surgery")
    graph_args(sp, selection=False)
    sp.add_argument("--x", action="append", required=True)
    sp.add_argument("--y", action="append", required=True)
    sp.add_argument("--given", action="append", default=[])
    sp.add_argument("--remove-in", action="append", default=[])
    sp.add_argument("--remove-out", action="append", default=[])
    sp.set_defaults(func=cmd_dsep)

    sp = sub.add_parser("falsify", help="analytic non-identifiability certificate on a chain graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--family", choices=cx.FAMILIES, default=cx.TYPE1)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_falsify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (GraphError, QueryError, SemError, InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateSelectionError, EvaluationError) as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
