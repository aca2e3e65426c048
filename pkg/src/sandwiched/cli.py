"""Command-line interface.

Subcommands mirror the library: `germ check|invariants|equivalent`,
`resolve`, `graph blowdown|definite|recognize`, `enumerate`,
`realizable`, `fillings report|distinguish|count` and `reproduce <name>`
for the bundled end-to-end examples with committed golden outputs.

Exit codes: 0 success, 1 domain error (the error class name is printed),
2 parse error.  With a fixed seed every command is byte-deterministic,
including under --jobs > 1.
"""

import argparse
import json
import random
import sys
from fractions import Fraction
from importlib import resources

from . import fillings as fillings_mod
from . import germs as germs_mod
from . import incidence as incidence_mod
from . import plumbing as plumbing_mod
from . import resolution as resolution_mod
from .germs import GermError, ParseError
from .plumbing import PlumbingError


class GoldenMismatch(GermError):
    pass


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_germ(path):
    return germs_mod.parse_germ(_read(path)).require_valid()


def _parse_slopes(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad slope {tok!r}") from None
    return tuple(out)


def random_slopes(r, seed):
    """Distinct random rational slopes, deterministic in the seed."""
    rng = random.Random(seed)
    out = []
    seen = set()
    while len(out) < r:
        a = Fraction(rng.randint(-60, 60), rng.randint(1, 24))
        if a not in seen:
            seen.add(a)
            out.append(a)
    return tuple(out)


QUADRILATERAL_POINTS = ((0, 0), (1, 0), (2, 3), (3, 1))


def quadrilateral_slopes(points=QUADRILATERAL_POINTS):
    """Slopes of the six lines connecting four points in general position.

    Line order: (12), (13), (14), (23), (24), (34).  The returned slopes
    carry the one algebraic relation (the three pairs of opposite sides
    cut out an involution of directions) that makes the four triple
    points realizable by translated lines.
    """
    pts = [(Fraction(x), Fraction(y)) for x, y in points]
    slopes = []
    for a in range(4):
        for b in range(a + 1, 4):
            dx = pts[b][0] - pts[a][0]
            if dx == 0:
                raise ValueError("quadrilateral has a vertical line")
            slopes.append((pts[b][1] - pts[a][1]) / dx)
    if len(set(slopes)) != 6:
        raise ValueError("quadrilateral slopes are not distinct")
    return tuple(slopes)


def quadrilateral_matrix():
    """Incidence matrix of six lines in complete-quadrilateral position.

    Four triple points (one per quadrilateral vertex), three double
    points (the diagonals), and two free points per line to pad every
    row sum to 5.  Rows follow the line order of quadrilateral_slopes.
    """
    lines = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    cols = []
    for vertex in range(4):
        cols.append(tuple(1 if vertex in lines[i] else 0 for i in range(6)))
    for i in range(6):
        for k in range(i + 1, 6):
            if not set(lines[i]) & set(lines[k]):
                cols.append(tuple(1 if j in (i, k) else 0 for j in range(6)))
    for i in range(6):
        single = tuple(1 if j == i else 0 for j in range(6))
        cols.extend([single, single])
    return incidence_mod.canonicalize(
        incidence_mod.IncidenceMatrix.from_columns(tuple(cols), 6)
    )


# ---------------------------------------------------------------------------
# report builders
# ---------------------------------------------------------------------------


def _invariants_report(germ, fmt):
    inv = germs_mod.germ_invariants(germ)
    r = germ.nbranches
    if fmt == "json":
        obj = {
            "branches": r,
            "lengths": list(germ.lengths),
            "delta": list(inv.delta),
            "delta_curve": inv.delta_total,
            "total_multiplicity": list(inv.total_mult),
            "embedded_multiplicity": {
                "calibrated": list(inv.embedded_mult_calibrated),
                "plain-nc": list(inv.embedded_mult_plain),
            },
            "intersections": [list(row) for row in inv.intersections],
            "standard": {
                "calibrated": germs_mod.is_standard(germ, "calibrated"),
                "plain-nc": germs_mod.is_standard(germ, "plain-nc"),
            },
        }
        return json.dumps(obj, sort_keys=True) + "\n"
    lines = [
        f"branches: {r}",
        "lengths: " + " ".join(str(x) for x in germ.lengths),
        "delta: " + " ".join(str(x) for x in inv.delta),
        f"delta-curve: {inv.delta_total}",
        "total-multiplicity: " + " ".join(str(x) for x in inv.total_mult),
        "embedded-multiplicity[calibrated]: "
        + " ".join(str(x) for x in inv.embedded_mult_calibrated),
        "embedded-multiplicity[plain-nc]: "
        + " ".join(str(x) for x in inv.embedded_mult_plain),
    ]
    for i in range(r):
        for k in range(i + 1, r):
            lines.append(f"intersection {i + 1} {k + 1}: {inv.intersections[i][k]}")
    lines.append(
        "standard[calibrated]: "
        + ("yes" if germs_mod.is_standard(germ, "calibrated") else "no")
    )
    lines.append(
        "standard[plain-nc]: "
        + ("yes" if germs_mod.is_standard(germ, "plain-nc") else "no")
    )
    if inv.embedded_mult_calibrated != inv.embedded_mult_plain:
        lines.append(
            "note: the calibrated and plain normal-crossings rules disagree "
            "on this germ; both values are shown"
        )
    return "\n".join(lines) + "\n"


def _graph_text(tree, ecl=None, attach=None, order=None, fmt="text"):
    ecl = ecl or set()
    attach = attach or {}
    if fmt == "json":
        attach_rev = {}
        for branch, vid in sorted(attach.items()):
            attach_rev.setdefault(vid, []).append(branch)
        if order is None:
            order = plumbing_mod._canonical_vertex_order(tree)
        lines = []
        for v in order:
            obj = {"type": "vertex", "id": v, "weight": tree.weight(v)}
            if v in ecl:
                obj["in_ecl"] = True
            if v in attach_rev:
                obj["attach"] = attach_rev[v]
            lines.append(json.dumps(obj, sort_keys=True))
        pos = {v: i for i, v in enumerate(order)}
        for a, b in sorted(tree.edges(), key=lambda e: (pos[e[0]], pos[e[1]])):
            lines.append(json.dumps({"type": "edge", "ends": [a, b]}, sort_keys=True))
        return "\n".join(lines) + "\n"
    return plumbing_mod.format_tree(tree, ecl=ecl, attach=attach, order=order)


def _resolve_report(germ, fmt):
    ext = resolution_mod.extend_cluster(germ)
    graph = resolution_mod.exceptional_graph(ext)
    order = resolution_mod.canonical_order(ext)
    attach = {i: v for i, v in enumerate(graph.attach, start=1)}
    out = _graph_text(graph.tree, ecl=graph.ecl, attach=attach, order=order, fmt=fmt)
    if not graph.ecl:
        out += "note: empty sandwiched graph: the contraction is a smooth point\n"
    return out


def _matrices_text(mats, fmt):
    if fmt == "json":
        return (
            "\n".join(
                json.dumps({"rows": [list(r) for r in m.rows]}) for m in mats
            )
            + "\n"
            if mats
            else ""
        )
    if not mats:
        return ""
    return incidence_mod.format_matrices(mats)


def _fraction_str(x):
    return str(x)


def _filling_report_text(germ, mats, fmt):
    reports = [fillings_mod.filling_report(germ, m) for m in mats]
    if fmt == "json":
        lines = []
        for rep in reports:
            lines.append(
                json.dumps(
                    {
                        "matrix": [list(r) for r in rep.matrix.rows],
                        "gram": [list(r) for r in rep.gram],
                        "euler": rep.euler,
                        "kernel_rank": rep.kernel_rank,
                        "kernel_gram": [list(r) for r in rep.kernel_gram],
                        "cap": json.loads(rep.cap.to_json()),
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"
    blocks = []
    for rep in reports:
        lines = ["matrix:"]
        lines += ["  " + " ".join(str(x) for x in row) for row in rep.matrix.rows]
        lines.append("gram:")
        lines += ["  " + " ".join(str(x) for x in row) for row in rep.gram]
        lines.append(f"euler: {rep.euler}")
        lines.append(f"kernel-rank: {rep.kernel_rank}")
        if rep.kernel_rank:
            lines.append("kernel-gram:")
            lines += ["  " + " ".join(str(x) for x in row) for row in rep.kernel_gram]
        lines.append("cap:")
        for h in rep.cap.handles:
            lines.append(
                f"  handle branch={h.branch} framing={h.framing} piece={h.piece} "
                f"fiber-offset=+{h.fiber_framing_offset}"
            )
        blocks.append("\n".join(lines))
    return ("\n\n".join(blocks) + "\n") if blocks else ""


# ---------------------------------------------------------------------------
# reproduce: bundled end-to-end examples with golden outputs
# ---------------------------------------------------------------------------


def _bundled(name):
    return resources.files("sandwiched").joinpath("data", name).read_text("utf-8")


def _reproduce_six_lines():
    germ = germs_mod.parse_germ(_bundled("six-lines.germ")).require_valid()
    out = ["example: six-lines"]
    out.append(_invariants_report(germ, "text").rstrip("\n"))
    report = resolution_mod.sandwiched_graph(germ)
    out.append("sandwiched graph:")
    out.append(_graph_text(report.tree).rstrip("\n"))
    cs = incidence_mod.constraints_of(germ)
    mats = incidence_mod.enumerate_matrices(cs)
    out.append(f"necessary-condition classes: {len(mats)}")
    generic = incidence_mod.enumerate_realizable(cs, random_slopes(6, seed=0), seed=0)
    out.append(f"realizable classes [generic slopes, seed 0]: {len(generic)}")
    quad = quadrilateral_matrix()
    verdict = incidence_mod.realizable_by_translated_lines(
        quad, quadrilateral_slopes(), seed=0
    )
    out.append(
        "drawn quadrilateral configuration realizable under its slopes: "
        + ("yes" if verdict.realizable else "no")
    )
    in_generic = quad.rows in {m.rows for m in generic}
    out.append(
        "drawn quadrilateral configuration in the generic set: "
        + ("yes" if in_generic else "no")
    )
    out.append(
        "note: the quadrilateral slopes realize both labelings that share "
        "the diagonal pairing (the opposite directions lie in involution), "
        "so a full special-slope enumeration enlarges the union further; "
        "the count below follows the one drawn configuration"
    )
    union = {m.rows for m in generic} | {quad.rows}
    out.append(f"realized incidence classes: {len(union)}")
    return "\n".join(out) + "\n"


def _reproduce_cusp_line():
    germ = germs_mod.parse_germ(_bundled("cusp-line.germ")).require_valid()
    out = ["example: cusp-line"]
    out.append(_invariants_report(germ, "text").rstrip("\n"))
    cs = incidence_mod.constraints_of(germ)
    mats = incidence_mod.enumerate_matrices(cs)
    out.append("matrices:")
    out.append(incidence_mod.format_matrices(mats).rstrip("\n"))
    out.append(_filling_report_text(germ, mats, "text").rstrip("\n"))
    out.append(f"necessary-condition classes: {len(mats)}")
    return "\n".join(out) + "\n"


def _reproduce_chain_graph():
    germ = germs_mod.parse_germ(_bundled("cusp-line-l53.germ")).require_valid()
    out = ["example: chain-graph"]
    report = resolution_mod.sandwiched_graph(germ)
    out.append("sandwiched graph [lengths 5 3]:")
    out.append(_graph_text(report.tree).rstrip("\n"))
    chain = plumbing_mod.WeightedTree(
        {"a": -3, "b": -2, "c": -3}, [("a", "b"), ("b", "c")]
    )
    iso = plumbing_mod.trees_isomorphic(report.tree, chain)
    out.append(f"isomorphic to chain -3 -2 -3: {'yes' if iso else 'no'}")
    germ6 = germs_mod.parse_germ(_bundled("cusp-line.germ")).require_valid()
    report6 = resolution_mod.sandwiched_graph(germ6)
    out.append("sandwiched graph [lengths 6 3]:")
    out.append(_graph_text(report6.tree).rstrip("\n"))
    out.append(
        "note: the quotient-chain presentation of this singularity matches "
        "lengths (5, 3); lengths (6, 3) contract to the star above instead. "
        "Both graphs are pinned by the proximity computation."
    )
    return "\n".join(out) + "\n"


_REPRODUCERS = {
    "six-lines": ("six-lines.txt", _reproduce_six_lines),
    "cusp-line": ("cusp-line.txt", _reproduce_cusp_line),
    "chain-graph": ("chain-graph.txt", _reproduce_chain_graph),
}


def reproduce(name):
    if name not in _REPRODUCERS:
        raise GermError(
            f"unknown example {name!r}; choose from {sorted(_REPRODUCERS)}"
        )
    golden_name, builder = _REPRODUCERS[name]
    text = builder()
    try:
        golden = resources.files("sandwiched").joinpath(
            "data", "golden", golden_name
        ).read_text("utf-8")
    except FileNotFoundError:
        raise GoldenMismatch(f"golden file {golden_name} is missing") from None
    if text != golden:
        for lineno, (got, want) in enumerate(
            zip(text.splitlines(), golden.splitlines()), start=1
        ):
            if got != want:
                raise GoldenMismatch(
                    f"{name}: first divergence at line {lineno}: "
                    f"got {got!r}, expected {want!r}"
                )
        raise GoldenMismatch(
            f"{name}: output length differs "
            f"({len(text.splitlines())} vs {len(golden.splitlines())} lines)"
        )
    return text


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _build_parser():
    top = argparse.ArgumentParser(
        prog="sandwiched",
        description="combinatorics of sandwiched singularities from decorated germs",
    )
    sub = top.add_subparsers(dest="command", required=True)

    germp = sub.add_parser("germ", help="germ validation, invariants, equivalence")
    germsub = germp.add_subparsers(dest="subcommand", required=True)
    p = germsub.add_parser("check")
    p.add_argument("file")
    p = germsub.add_parser("invariants")
    p.add_argument("file")
    p.add_argument("--m-big-rule", choices=["calibrated", "plain-nc"],
                   default="calibrated")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p = germsub.add_parser("equivalent")
    p.add_argument("file_a")
    p.add_argument("file_b")

    p = sub.add_parser("resolve", help="emit the full exceptional graph")
    p.add_argument("file")
    p.add_argument("--format", choices=["text", "json"], default="text")

    graphp = sub.add_parser("graph", help="plumbing calculus on weighted trees")
    graphsub = graphp.add_subparsers(dest="subcommand", required=True)
    p = graphsub.add_parser("blowdown")
    p.add_argument("file")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p = graphsub.add_parser("definite")
    p.add_argument("file")
    p = graphsub.add_parser("recognize")
    p.add_argument("file")
    p.add_argument("--max-extra", type=int, default=None)

    p = sub.add_parser("enumerate", help="all incidence matrices of a germ")
    p.add_argument("--germ", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser(
        "realizable", help="filter matrices by translated-line realizability"
    )
    p.add_argument("--germ", required=True)
    p.add_argument("--slopes", required=True,
                   help="comma-separated rational slopes, one per branch")
    p.add_argument("--matrices", default=None,
                   help="matrix file to filter; defaults to full enumeration")
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["text", "json"], default="text")

    fillp = sub.add_parser("fillings", help="Milnor-fiber distinguishing data")
    fillsub = fillp.add_subparsers(dest="subcommand", required=True)
    p = fillsub.add_parser("report")
    p.add_argument("--germ", required=True)
    p.add_argument("--matrices", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p = fillsub.add_parser("distinguish")
    p.add_argument("--germ", required=True)
    p.add_argument("--matrices", required=True,
                   help="file with exactly two matrices")
    p = fillsub.add_parser("count")
    p.add_argument("--germs", nargs="+", required=True)
    p.add_argument("--matrices", nargs="+", required=True)

    p = sub.add_parser("reproduce", help="re-run a bundled example against its golden")
    p.add_argument("name", choices=sorted(_REPRODUCERS))
    return top


def _run(args):
    if args.command == "germ":
        if args.subcommand == "check":
            germ = germs_mod.parse_germ(_read(args.file))
            verdict = germs_mod.validate_germ(germ)
            if verdict.ok:
                print("valid")
                return 0
            for v in verdict.violations:
                print(f"{v.kind}: {v.message}")
            return 1
        if args.subcommand == "invariants":
            germ = _load_germ(args.file)
            sys.stdout.write(_invariants_report(germ, args.format))
            return 0
        if args.subcommand == "equivalent":
            ga = _load_germ(args.file_a)
            gb = _load_germ(args.file_b)
            same, witness = germs_mod.are_topologically_equivalent(ga, gb)
            if same:
                print("equivalent")
                for a, b in sorted(witness.items()):
                    print(f"  {a} -> {b}")
                return 0
            print("not equivalent")
            return 0

    if args.command == "resolve":
        germ = _load_germ(args.file)
        sys.stdout.write(_resolve_report(germ, args.format))
        return 0

    if args.command == "graph":
        tree, _, _ = plumbing_mod.parse_tree(_read(args.file))
        if args.subcommand == "blowdown":
            result = plumbing_mod.reduce_tree(tree)
            print(f"smooth: {'yes' if result.smooth else 'no'}")
            if result.trace:
                print("trace: " + " ".join(result.trace))
            if len(result.tree):
                sys.stdout.write(_graph_text(result.tree, fmt=args.format))
            return 0
        if args.subcommand == "definite":
            verdict = plumbing_mod.is_negative_definite(tree)
            print(f"negative-definite: {'yes' if verdict else 'no'}")
            return 0
        if args.subcommand == "recognize":
            result = plumbing_mod.recognize_sandwiched(tree, max_extra=args.max_extra)
            if isinstance(result, plumbing_mod.Certificate):
                print("sandwiched: yes")
                for host, count in result.additions:
                    print(f"add {host} {count}")
                print("contract " + " ".join(result.contractions))
                print(
                    "verified: "
                    + ("yes" if plumbing_mod.verify_certificate(tree, result) else "no")
                )
            else:
                print("sandwiched: unknown")
                for v, bound in result.bound:
                    print(f"bound {v} {bound}")
            return 0

    if args.command == "enumerate":
        germ = _load_germ(args.germ)
        cs = incidence_mod.constraints_of(germ)
        mats = incidence_mod.enumerate_matrices(cs, jobs=args.jobs)
        sys.stdout.write(_matrices_text(mats, args.format))
        return 0

    if args.command == "realizable":
        germ = _load_germ(args.germ)
        cs = incidence_mod.constraints_of(germ)
        slopes = _parse_slopes(args.slopes)
        if args.matrices is not None:
            candidates = [
                incidence_mod.canonicalize(m)
                for m in incidence_mod.parse_matrices(_read(args.matrices))
            ]
            kept = [
                m
                for m in candidates
                if incidence_mod.realizable_by_translated_lines(
                    m, slopes, samples=args.samples, seed=args.seed
                ).realizable
            ]
        else:
            kept = list(
                incidence_mod.enumerate_realizable(
                    cs, slopes, samples=args.samples, seed=args.seed, jobs=args.jobs
                )
            )
        sys.stdout.write(_matrices_text(kept, args.format))
        return 0

    if args.command == "fillings":
        if args.subcommand == "report":
            germ = _load_germ(args.germ)
            mats = incidence_mod.parse_matrices(_read(args.matrices))
            sys.stdout.write(_filling_report_text(germ, mats, args.format))
            return 0
        if args.subcommand == "distinguish":
            germ = _load_germ(args.germ)
            mats = incidence_mod.parse_matrices(_read(args.matrices))
            if len(mats) != 2:
                raise GermError(
                    f"distinguish needs exactly two matrices, got {len(mats)}"
                )
            verdict = fillings_mod.distinguish(germ, mats[0], mats[1])
            print("SameClass" if verdict.same_class else "DistinctFillings")
            print(verdict.note)
            return 0
        if args.subcommand == "count":
            if len(args.germs) != len(args.matrices):
                raise GermError("need one matrix file per germ file")
            germ_list = [_load_germ(f) for f in args.germs]
            sets = [incidence_mod.parse_matrices(_read(f)) for f in args.matrices]
            count = fillings_mod.filling_lower_bound(germ_list, sets)
            print(f"classes: {count}")
            print(
                "note: counts column-permutation classes of the supplied sets; "
                "unless a set was filtered by a realizability oracle this is a "
                "necessary-condition count"
            )
            return 0

    if args.command == "reproduce":
        sys.stdout.write(reproduce(args.name))
        return 0

    raise AssertionError("unhandled command")


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ParseError as exc:
        print(f"ParseError: {exc}", file=sys.stderr)
        return 2
    except (GermError, PlumbingError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
