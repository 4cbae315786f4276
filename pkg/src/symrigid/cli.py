"""Command-line surface: validate, lift, analyze, certify, plot.

Exit codes: 0 on success, 2 when the input is rejected on domain grounds
(a violated gain-graph clause, an out-of-scope count, a size-limit refusal,
a non-tight graph — always with a witness or reason), 3 on unreadable or
malformed input files, 4 when certification hits a graph that contradicts
the completeness guarantee (a bug detector, with a stuck-graph dump).
"""

from __future__ import annotations

import argparse
import sys

from .fileio import (
    FileFormatError,
    analysis_report,
    certificate_to_dict,
    covering_to_dict,
    load_gain_graph,
    to_json,
)
from .gains import GainGraph, GainGraphError, ValidationError, lift
from .groups import GroupError
from .henneberg import (
    HennebergError,
    TheoremContradiction,
    certify_tight,
    reduction_scope,
    theorem_counts,
)
from .orbit import ConfigurationError
from .plot import render_svg
from .sparsity import CountSpec, SparsityError, gain_sparse

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_PARSE = 3
EXIT_CONTRADICTION = 4


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(g: GainGraph) -> str:
    geo = g.group.geometry
    k = g.group.order
    group = "reflection" if geo == "reflection" else f"rotation of order {k}"
    return (
        f"{group}, {len(g.vertices)} vertices "
        f"({len(g.fixed_vertices)} fixed), {len(g.edges)} edges"
    )


def cmd_validate(args) -> int:
    g = load_gain_graph(args.file)
    report = g.validate()
    if report is None:
        print(f"OK: {_summary(g)}")
        return EXIT_OK
    print(f"REJECTED: {report}")
    return EXIT_REJECTED


def cmd_lift(args) -> int:
    g = load_gain_graph(args.file)
    _emit(to_json(covering_to_dict(lift(g))), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    g = load_gain_graph(args.file)
    report = g.validate()
    if report is not None:
        print(f"REJECTED: {report}")
        return EXIT_REJECTED
    doc = analysis_report(g, seed=args.seed, field=args.field)
    _emit(to_json(doc), args.out)
    return EXIT_OK


def _parse_count(text: str) -> CountSpec:
    parts = text.split(",")
    if len(parts) != 2:
        raise FileFormatError(f"--count expects two integers m,l; got {text!r}")
    try:
        m, l = (int(p.strip()) for p in parts)
    except ValueError as exc:
        raise FileFormatError(f"--count expects two integers m,l; got {text!r}") from exc
    try:
        return CountSpec(m, l, True)
    except SparsityError as exc:
        raise FileFormatError(str(exc)) from exc


def cmd_certify(args) -> int:
    g = load_gain_graph(args.file)
    report = g.validate()
    if report is not None:
        print(f"REJECTED: {report}")
        return EXIT_REJECTED

    if args.count is not None:
        spec = _parse_count(args.count)
    else:
        counts = theorem_counts(g.group)
        if counts is None:
            print(
                "REJECTED: no certified counts for a rotation of order "
                f"{g.group.order}; pass an explicit tight count via --count"
            )
            return EXIT_REJECTED
        spec = next((c for c in counts if gain_sparse(g, c).tight), counts[0])

    reduction_scope(g.group, spec)
    verdict = gain_sparse(g, spec)
    if not verdict.tight:
        witness = {
            "status": verdict.status,
            "count": spec.describe(),
            "vertices": [str(v) for v in verdict.vertices],
            "edges": [str(e) for e in verdict.edges],
            "edge_count": verdict.count,
            "bound": verdict.bound,
        }
        if verdict.clause:
            witness["clause"] = verdict.clause
        print(f"REJECTED: graph is not {spec.describe()}-tight ({verdict.status})")
        sys.stdout.write(to_json(witness))
        return EXIT_REJECTED

    cert = certify_tight(g, spec)
    doc = certificate_to_dict(cert)
    doc["seed"] = args.seed
    _emit(to_json(doc), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    g = load_gain_graph(args.file)
    report = g.validate()
    if report is not None:
        print(f"REJECTED: {report}")
        return EXIT_REJECTED
    if not 0 <= args.rep < g.group.order:
        print(
            f"REJECTED: representation index {args.rep} out of range "
            f"for group order {g.group.order}"
        )
        return EXIT_REJECTED
    _emit(render_svg(g, j=args.rep, seed=args.seed), args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symrigid",
        description="Rigidity analysis of plane frameworks with mirror or rotational symmetry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a gain-graph file against the domain rules")
    p.add_argument("file", help="gain-graph JSON file")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("lift", help="expand a gain graph into its symmetric covering")
    p.add_argument("file", help="gain-graph JSON file")
    p.add_argument("--out", help="write the covering JSON here instead of stdout")
    p.set_defaults(handler=cmd_lift)

    p = sub.add_parser("analyze", help="full combinatorial and numerical rigidity report")
    p.add_argument("file", help="gain-graph JSON file")
    p.add_argument("--seed", type=int, default=0, help="seed for the random placement (default 0)")
    p.add_argument(
        "--field",
        choices=("prime", "complex"),
        default="prime",
        help="arithmetic for the rank computations (default prime)",
    )
    p.add_argument("--out", help="write the report JSON here instead of stdout")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("certify", help="reduce a tight graph to a base graph, emitting the trail")
    p.add_argument("file", help="gain-graph JSON file")
    p.add_argument(
        "--count",
        help="the count to certify, as m,l (default: a characterizing count the graph is tight for)",
    )
    p.add_argument("--seed", type=int, default=0, help="recorded in the output (default 0)")
    p.add_argument("--out", help="write the certificate JSON here instead of stdout")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("plot", help="draw the covering framework as SVG, flex arrows included")
    p.add_argument("file", help="gain-graph JSON file")
    p.add_argument("--rep", type=int, default=0, help="representation block to inspect (default 0)")
    p.add_argument("--seed", type=int, default=0, help="seed for the drawn placement (default 0)")
    p.add_argument("--out", help="write the SVG here instead of stdout")
    p.set_defaults(handler=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"PARSE ERROR: cannot read {exc.filename!r}")
        return EXIT_PARSE
    except IsADirectoryError as exc:
        print(f"PARSE ERROR: {exc.filename!r} is a directory")
        return EXIT_PARSE
    except FileFormatError as exc:
        print(f"PARSE ERROR: {exc}")
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"REJECTED: {exc}")
        return EXIT_REJECTED
    except TheoremContradiction as exc:
        print(f"THEOREM CONTRADICTION: {exc}")
        dump = {
            "count": exc.spec.describe(),
            "exceptional": [list(map(str, pair)) for pair in exc.report.exceptional],
            "graph_key": _jsonable(exc.report.graph_key),
        }
        sys.stdout.write(to_json(dump))
        return EXIT_CONTRADICTION
    except (GainGraphError, SparsityError, HennebergError, ConfigurationError, GroupError) as exc:
        print(f"REJECTED: {exc}")
        return EXIT_REJECTED


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


if __name__ == "__main__":
    sys.exit(main())
