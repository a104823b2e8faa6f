"""Command-line entry point: ``omegarel <command> ...``.

Exit status is 0 on success, 1 when a requested ``--lambda`` verdict is false
and 2 on any input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

import numpy as np

from . import dataio
from .colimit import set_colimit_oracle, vague_colimit
from .diagram import commutativity_degree, vague_limit
from .errors import OmegaRelError
from .lattice import FiniteLattice, Lattice, make_flavor, make_lattice, parse_flavor_arg
from .lnn import default_flavor, description_fit, extract_formula, format_formulas
from .omega_object import lambda_similar
from .relation import Attribute, Relation, reindex

log = logging.getLogger("omegarel")


def _degree_text(lattice: Lattice, value) -> str:
    """Raw number, plus the element label for finite lattices."""
    if isinstance(lattice, FiniteLattice):
        return f"{int(value)} ({lattice.format(value)})"
    return lattice.format(value)


def _flavor_override(args):
    if not args.flavor:
        return None
    return parse_flavor_arg(args.flavor)


def _load(args):
    _, D = dataio.parse_spec(args.spec, _flavor_override(args), args.allow_nondistributive)
    return D


def _threshold(lattice: Lattice, text):
    return None if text is None else lattice.parse(text)


def cmd_limit(args) -> int:
    D = _load(args)
    sys.stdout.write(dataio.table_text(vague_limit(D)))
    return 0


def cmd_commute(args) -> int:
    D = _load(args)
    sources = None if args.sources is None else [s for s in args.sources.split(",") if s]
    report = commutativity_degree(D, sources)
    lat = D.flavor.lattice
    dist = report.distribution
    if dist.attributes:
        sys.stdout.write(dataio.table_text(dist) if not args.all_rows else _all_rows(dist))
    print(f"degree: {_degree_text(lat, report.degree)}")
    print(f"commutative: {'yes' if report.commutative else 'no'}")
    status = 0
    if args.threshold is not None:
        ok = report.holds(_threshold(lat, args.threshold))
        print(f"{args.threshold}-commutative: {'yes' if ok else 'no'}")
        status = 0 if ok else 1
    return status


def _all_rows(rel: Relation) -> str:
    lat = rel.lattice
    lines = [",".join(list(rel.names) + [dataio.WEIGHT_COLUMN])]
    for values, w in rel.items(include_bottom=True):
        lines.append(",".join([dataio.format_value(v) for v in values] + [lat.format(w)]))
    return "\n".join(lines) + "\n"


def cmd_colimit(args) -> int:
    D = _load(args)
    if args.oracle:
        for cls in set_colimit_oracle(D):
            items = sorted(cls, key=lambda e: (D.vertices.index(e[0]), repr(e[1])))
            print("{" + ", ".join(f"{v}:{dataio.format_value(x)}" for v, x in items) + "}")
        return 0
    col = vague_colimit(D)
    if not col.precondition_ok:
        for v in col.violations:
            log.warning("composite %s then %s exceeds its bound at %r", v.first, v.second, v.witness)
    if not col.transitive and not args.closed:
        log.warning("the colimit relation is not transitive; pass --closed for its similarity closure")
    if args.closed:
        col = col.closure()
    rel = col.relation
    lat = rel.lattice
    lines = ["block_1,tuple_1,block_2,tuple_2," + dataio.WEIGHT_COLUMN]
    mat = col.matrix()
    for i, j in zip(*np.nonzero(~np.asarray(lat.eq(mat, lat.bottom), dtype=bool))):
        (b1, t1), (b2, t2) = col.carrier.domain[i], col.carrier.domain[j]
        lines.append(",".join([b1, dataio.format_value(t1), b2, dataio.format_value(t2), lat.format(mat[i, j])]))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_similar(args) -> int:
    lat = make_lattice(args.lattice)
    times, plus = parse_flavor_arg(args.flavor) if args.flavor else ("tensor", "join")
    flavor = make_flavor(lat, times, plus, allow_nondistributive=args.allow_nondistributive)
    x = dataio.read_table(args.first, lat)
    y = dataio.read_table(args.second, lat)
    if sorted(x.names) != sorted(y.names):
        raise dataio.ColumnMismatch("the two tables have different columns")
    # put both tables on the union of their observed domains
    attrs = []
    for a in x.attributes:
        b = y.attribute(a.name)
        values = sorted(set(a.domain) | set(b.domain), key=dataio._sort_key)
        attrs.append(Attribute(a.name, tuple(values)))
    x = reindex(x, attrs)
    y = reindex(y, [next(a for a in attrs if a.name == n) for n in y.names])
    sim = dataio.read_similarity(args.similarity, attrs, lat) if args.similarity else None
    degree = lambda_similar(x, y, sim, flavor)
    print(f"degree: {_degree_text(lat, degree)}")
    if args.threshold is not None:
        ok = bool(lat.leq(lat.asarray(_threshold(lat, args.threshold)), lat.asarray(degree)))
        print(f"{args.threshold}-similar: {'yes' if ok else 'no'}")
        return 0 if ok else 1
    return 0


def cmd_query(args) -> int:
    D = _load(args)
    Q = dataio.read_query(args.query)
    sys.stdout.write(dataio.table_text(dataio.answer_query(D, Q)))
    return 0


def _grid_arg(text):
    if text is None:
        return None
    if text.startswith("grid("):
        lo, hi, step = (float(x) for x in text[5:].rstrip(")").split(","))
        return list(dataio.grid_values(lo, hi, step))
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_lnn_extract(args) -> int:
    net = dataio.load_network(args.network)
    formulas = extract_formula(net)
    print(format_formulas(formulas))
    if args.dataset is None:
        return 0
    flavor = default_flavor()
    if args.flavor:
        times, plus = parse_flavor_arg(args.flavor)
        flavor = make_flavor(flavor.lattice, times, plus, allow_nondistributive=args.allow_nondistributive)
    data = dataio.load_dataset(args.dataset, flavor.lattice, args.similarity)
    mapping = dataio.parse_mapping(args.map) if args.map else None
    fit = description_fit(formulas, data.dist, data.similarity, flavor, _grid_arg(args.grid), mapping,
                          inputs=net.inputs, threshold=_threshold(flavor.lattice, args.threshold))
    return _report_fit(flavor.lattice, fit, args.threshold)


def _report_fit(lat, fit, threshold_text) -> int:
    print(f"degree: {_degree_text(lat, fit.degree)}")
    if fit.holds is None:
        return 0
    print(f"{threshold_text}-description: {'yes' if fit.holds else 'no'}")
    return 0 if fit.holds else 1


def cmd_describe(args) -> int:
    D = _load(args)
    lat = D.flavor.lattice
    data = dataio.load_dataset(args.dataset, lat, args.similarity)
    mapping = dataio.parse_mapping(args.map) if args.map else {c: c for c in data.columns}
    fit = dataio.describe(D, data, mapping, _threshold(lat, args.threshold))
    return _report_fit(lat, fit, args.threshold)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omegarel", description="Many-valued relational limits, colimits and descriptions.")
    p.add_argument("-v", "--verbose", action="store_true", help="log snapping and diagnostics")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--flavor", help="override the flavor, e.g. times=tensor,plus=join")
    common.add_argument("--allow-nondistributive", action="store_true",
                        help="accept flavors whose times does not distribute over plus")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("limit", parents=[common], help="print the vague limit of a diagram spec")
    s.add_argument("spec")
    s.set_defaults(func=cmd_limit)

    s = sub.add_parser("commute", parents=[common], help="commutativity degrees on the source vertices")
    s.add_argument("spec")
    s.add_argument("--sources", help="comma-separated source vertices (default: the sources declared in the file)")
    s.add_argument("--lambda", dest="threshold", help="threshold for the verdict (exit 1 when it fails)")
    s.add_argument("--all-rows", action="store_true", help="also print source tuples of degree ⊥")
    s.set_defaults(func=cmd_commute)

    s = sub.add_parser("colimit", parents=[common], help="print the vague colimit relation")
    s.add_argument("spec")
    s.add_argument("--closed", action="store_true", help="print the similarity closure instead")
    s.add_argument("--oracle", action="store_true", help="print the set colimit classes (boolean lattice)")
    s.set_defaults(func=cmd_colimit)

    s = sub.add_parser("similar", parents=[common], help="similarity degree of two weighted tables")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--lattice", default="product")
    s.add_argument("--similarity", help="similarity table on the shared columns (default: identity)")
    s.add_argument("--lambda", dest="threshold")
    s.set_defaults(func=cmd_similar)

    s = sub.add_parser("query", parents=[common], help="answer a query (graph homomorphism) against a spec")
    s.add_argument("spec")
    s.add_argument("query")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("lnn-extract", parents=[common], help="formulas of a network, optionally fitted to data")
    s.add_argument("network")
    s.add_argument("--grid", help="comma-separated points or grid(lo,hi,step) (default: dataset values)")
    s.add_argument("--dataset")
    s.add_argument("--similarity")
    s.add_argument("--map", action="append", help="column=wire (repeatable or comma-separated)")
    s.add_argument("--lambda", dest="threshold")
    s.set_defaults(func=cmd_lnn_extract)

    s = sub.add_parser("describe", parents=[common], help="description degree of a dataset by a spec's limit")
    s.add_argument("spec")
    s.add_argument("--dataset", required=True)
    s.add_argument("--similarity")
    s.add_argument("--map", action="append", help="column=vertex (repeatable or comma-separated)")
    s.add_argument("--lambda", dest="threshold")
    s.set_defaults(func=cmd_describe)
    return p


def _configure_logging(verbose: bool) -> None:
    pkg = logging.getLogger("omegarel")
    for h in [h for h in pkg.handlers if getattr(h, "_omegarel_cli", False)]:
        pkg.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._omegarel_cli = True
    pkg.addHandler(handler)
    pkg.setLevel(logging.INFO if verbose else logging.WARNING)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (OmegaRelError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
