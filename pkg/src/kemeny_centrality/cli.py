"""Command-line front end.

Subcommands:

``kemeny``   print the Kemeny constant (per component, or regularized)
``scores``   score every edge and write CSV or DOT
``bridges``  list the cut-edges

Exit codes: 0 success, 2 invalid input or parameters, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from fractions import Fraction

import numpy as np

from .centrality import CutEdgePolicy, Measure, RegularizationConfig, ScoreTable, edge_scores
from .errors import InputOutputError, KemenyError
from .graph import (
    Graph,
    assign_length_weights,
    connected_components,
    find_bridges,
    load_coordinates,
    load_edge_list,
    load_matrix_market,
)
from .kemeny import kemeny_per_component, kemeny_regularized, kemeny_trace

log = logging.getLogger("kemeny_centrality")

DIGITS = 12
CSV_COLUMNS = ["i", "j", "weight", "score", "is_cut_edge", "alpha", "beta"]
PEN_MIN, PEN_MAX = 1.0, 8.0


def fmt(x) -> str:
    return "%.*g" % (DIGITS, x)


def rational_form(x: float, max_den: int = 1000) -> str:
    """``'61/24 ≈ 2.541667'`` when ``x`` is a short fraction, else 12 digits."""
    frac = Fraction(x).limit_denominator(max_den)
    if frac.denominator > 1 and abs(float(frac) - x) <= 1e-12 * max(1.0, abs(x)):
        return f"{frac.numerator}/{frac.denominator} ≈ {x:.6f}"
    return fmt(x)


def _load(args) -> Graph:
    if args.format == "matrixmarket":
        g = load_matrix_market(args.input)
    else:
        g = load_edge_list(args.input, indexing=args.indexing)
    if args.coords:
        g = assign_length_weights(g, load_coordinates(args.coords, g))
    return g


def _label(graph: Graph, k) -> str:
    return str(graph.labels[k])


# -- kemeny -------------------------------------------------------------------


def cmd_kemeny(args, out) -> int:
    g = _load(args)
    comp = connected_components(g)
    print(f"nodes: {g.n}  edges: {g.n_entries}  components: {comp.count}", file=out)
    if args.reg is not None:
        res = kemeny_regularized(g, args.reg, algorithm=args.algorithm)
        print(f"method: regularized (r={fmt(args.reg)})", file=out)
        print(f"K_r = {rational_form(res.value)}", file=out)
        return 0
    res = kemeny_trace(g) if comp.count == 1 else kemeny_per_component(g)
    print(f"method: {res.method.value}", file=out)
    if res.per_component is not None:
        for c, v in enumerate(res.per_component):
            print(f"component {c}: K = {rational_form(v)}", file=out)
    print(f"K = {rational_form(res.value) if res.finite else 'inf'}", file=out)
    return 0


# -- scores -------------------------------------------------------------------


def _score_text(table: ScoreTable, k: int) -> str:
    if table.unbounded[k]:
        return "cut-edge" if table.measure is Measure.DELETION else "inf"
    return fmt(table.score[k])


def write_csv(table: ScoreTable, out):
    g = table.graph
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    rows, cols, weights = table.rows, table.cols, table.weights
    for k in table.ranking(DIGITS):
        w.writerow([
            _label(g, rows[k]), _label(g, cols[k]), fmt(weights[k]), _score_text(table, k),
            "true" if table.is_cut_edge[k] else "false",
            fmt(table.alpha[k]), fmt(table.beta[k]),
        ])


def pen_widths(table: ScoreTable) -> np.ndarray:
    """Scores mapped linearly onto ``[PEN_MIN, PEN_MAX]``; unbounded gets the maximum."""
    finite = ~table.unbounded
    width = np.full(len(table), PEN_MAX)
    if np.any(finite):
        # scale the printed values so that roundoff-level ties stay ties
        s = np.array([float(fmt(x)) for x in table.score[finite]])
        lo, hi = s.min(), s.max()
        if hi > lo:
            width[finite] = PEN_MIN + (PEN_MAX - PEN_MIN) * (s - lo) / (hi - lo)
        else:
            width[finite] = PEN_MIN
    return width


def write_dot(table: ScoreTable, out):
    g = table.graph
    width = pen_widths(table)
    out.write("graph kemeny_centrality {\n")
    out.write(f'  graph [measure="{table.measure.value}", r="{fmt(table.r)}"];\n')
    rows, cols = table.rows, table.cols
    for k in table.ranking(DIGITS):
        attrs = [
            f'score="{_score_text(table, k)}"',
            f"penwidth={width[k]:.4f}",
            f"cut_edge={'true' if table.is_cut_edge[k] else 'false'}",
        ]
        if table.is_cut_edge[k]:
            attrs.append('style="dashed"')
        out.write(f'  "{_label(g, rows[k])}" -- "{_label(g, cols[k])}" [{", ".join(attrs)}];\n')
    out.write("}\n")


def cmd_scores(args, out) -> int:
    g = _load(args)
    measure = Measure(args.measure)
    config = RegularizationConfig(
        r=args.reg if 0 < args.reg <= 1 else RegularizationConfig.r,
        cut_edge_policy=CutEdgePolicy(args.cut_edge_policy),
    )
    table = edge_scores(g, measure, config, r=args.reg, algorithm=args.algorithm,
                        threads=args.threads)
    if table.ill_conditioned.any():
        log.warning("%d edge(s) flagged as ill-conditioned", int(table.ill_conditioned.sum()))
    buf = io.StringIO()
    (write_dot if args.output_format == "dot" else write_csv)(table, buf)
    if args.output in (None, "-"):
        out.write(buf.getvalue())
    else:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise InputOutputError(f"cannot write {args.output}: {exc}") from exc
    return 0


# -- bridges ------------------------------------------------------------------


def cmd_bridges(args, out) -> int:
    g = _load(args)
    for e in sorted(find_bridges(g), key=lambda e: (g.labels[e.i], g.labels[e.j])):
        print(f"({_label(g, e.i)},{_label(g, e.j)})", file=out)
    return 0


# -- entry point --------------------------------------------------------------


def _nonneg_float(text):
    v = float(text)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite number >= 0, got {text}")
    return v


def _pos_float(text):
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("expected a number > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="graph file")
    common.add_argument("--format", choices=["edgelist", "matrixmarket"], default="edgelist")
    common.add_argument("--indexing", type=int, choices=[0, 1], default=1,
                        help="first node id in edge lists (default 1)")
    common.add_argument("--coords", help="'id x y' file; weights become exp(-length/max length)")
    common.add_argument("--algorithm", choices=["auto", "dense", "cholesky"], default="auto")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="kemeny-centrality",
        description="Kemeny constant and Kemeny-based edge centrality of weighted graphs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kemeny", parents=[common], help="print the Kemeny constant")
    k.add_argument("--reg", type=_pos_float, default=None,
                   help="report the regularized constant K_r for this r")
    k.set_defaults(func=cmd_kemeny)

    s = sub.add_parser("scores", parents=[common], help="score every edge")
    s.add_argument("--measure", choices=[m.value for m in Measure], default="filtered")
    s.add_argument("--reg", type=_nonneg_float, default=1e-8,
                   help="regularization r (default 1e-8; 0 allowed for the loop measure)")
    s.add_argument("--cut-edge-policy", choices=[c.value for c in CutEdgePolicy],
                   default=CutEdgePolicy.EXACT_BRIDGES.value)
    s.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all cores")
    s.add_argument("--output", help="output file (default stdout)")
    s.add_argument("--output-format", choices=["csv", "dot"], default="csv")
    s.set_defaults(func=cmd_scores)

    b = sub.add_parser("bridges", parents=[common], help="list cut-edges")
    b.set_defaults(func=cmd_bridges)
    return p


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except KemenyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
