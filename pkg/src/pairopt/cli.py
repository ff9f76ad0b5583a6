"""Command-line interface: ``pairopt solve | table | verify | export``.

Exit codes: 0 success, 1 usage error, 2 certification or verification
failure, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from math import comb
from pathlib import Path

from . import __version__
from .closed_form import info_summary
from .design_core import DesignProblem, InvariantDesign, orbit_count, parameter_layout
from .effects import enumerate_orbit
from .optimizer import (
    CertificationError,
    KW_TOL,
    WEIGHT_TOL,
    optimal_depth,
    optimize_full,
)
from .oracle import (
    CapExceeded,
    check_appendix_sums,
    check_lemma1,
    check_variance_elements,
    check_variance_function,
    default_cap,
    enumerate_info_matrix,
    explicit_info_matrix,
)

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_CAP = 0, 1, 2, 3

DESIGN_FORMAT = "pairopt-design/1"
REPORT_FORMAT = "pairopt-solve/1"

TABLE1_V = (2, 3, 4, 5, 6, 7, 8, 9, 10, 20)
TABLE1_K = range(4, 11)
TABLE2_K = range(4, 11)
TABLE2_V = range(2, 9)
TABLE4_K = range(4, 11)
TABLE4_V = range(2, 9)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def round_half_up(x: float, places: int = 3) -> Decimal:
    q = Decimal(1).scaleb(-places)
    return Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP)


def fmt_weight(w: float, places: int = 3) -> str:
    return str(round_half_up(w, places))


def fmt_variance(x: float, places: int = 3) -> str:
    r = round_half_up(x, places)
    return "1" if r == 1 else str(r)


def fmt_design(support, weights, S: int, places: int = 3) -> str:
    """Table notation: ``d`` for one depth, ``(d, w_d)`` for ``{d, S}``, else a depth map."""
    if len(support) == 1:
        return str(support[0])
    if len(support) == 2 and support[1] == S:
        return f"({support[0]}, {fmt_weight(weights[0], places)})"
    body = ", ".join(f"{d}: {fmt_weight(w, places)}" for d, w in zip(support, weights))
    return "{" + body + "}"


def _problem(args) -> DesignProblem:
    try:
        return DesignProblem(args.attributes, args.strength, args.levels)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# -- solve ------------------------------------------------------------------


def solve_report(problem: DesignProblem, target: str, tolerance: float = WEIGHT_TOL,
                 kw_tolerance: float = KW_TOL, precision: int = 3) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    report = {
        "format": REPORT_FORMAT,
        "problem": {"K": problem.K, "S": problem.S, "v": problem.v},
        "target": target,
    }
    certified = True
    if target == "full":
        try:
            result = optimize_full(problem, tolerance, kw_tolerance)
        except CertificationError as exc:
            result = exc.best
            certified = False
            if result is None:
                report.update(error=str(exc), certified=False,
                              seconds=time.perf_counter() - t0)
                return report, False
        cert = result.certificate
        report.update(
            support=list(result.support),
            weights={str(d): w for d, w in zip(result.support, result.weights)},
            weights_rounded={str(d): fmt_weight(w, precision) for d, w in zip(result.support, result.weights)},
            design=fmt_design(result.support, result.weights, problem.S, precision),
            objective=result.objective,
            normalized_variance=list(cert.per_depth),
            normalized_variance_rounded=[fmt_variance(x) for x in cert.per_depth],
            max_normalized_variance=cert.max_normalized_variance,
            certified=cert.passed,
            kw_tolerance=kw_tolerance,
        )
    else:
        d = optimal_depth(problem, target)
        report.update(optimal_depth=d, support=[d], weights={str(d): 1.0}, certified=True)
    report["seconds"] = time.perf_counter() - t0
    return report, certified


def cmd_solve(args) -> int:
    problem = _problem(args)
    report, ok = solve_report(problem, args.target, args.tolerance, args.kw_tolerance, args.precision)
    if args.json:
        print(json.dumps(report, indent=2))
    elif args.target != "full":
        print(f"K={problem.K} S={problem.S} v={problem.v} target={args.target}: d*={report['optimal_depth']}")
    else:
        print(f"K={problem.K} S={problem.S} v={problem.v} target=full")
        if "design" in report:
            print(f"design: {report['design']}")
            print("weights: " + ", ".join(f"w_{d}={w:.10g}" for d, w in report["weights"].items()))
            print("V(d)/p: " + " ".join(report["normalized_variance_rounded"]))
            print(f"max V(d)/p = {report['max_normalized_variance']:.12g}")
        print("certificate: " + ("PASS" if report["certified"] else "FAIL"))
    if not ok:
        print("error: no candidate design passed the equivalence check", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


# -- table ------------------------------------------------------------------


def table1_rows():
    """``(K, S, [d* for v in TABLE1_V])`` with ``S = K - 1``."""
    for K in TABLE1_K:
        S = K - 1
        yield K, S, [optimal_depth(DesignProblem(K, S, v), "second-order") for v in TABLE1_V]


def table2_rows(precision: int = 3):
    """``(K, S, [design cell for v in TABLE2_V])``."""
    for K in TABLE2_K:
        for S in range(3, K + 1):
            cells = []
            for v in TABLE2_V:
                r = optimize_full(DesignProblem(K, S, v))
                cells.append(fmt_design(r.support, r.weights, S, precision))
            yield K, S, cells


def table4_rows():
    """``(K, v, support, [V(d)/p for d = 1..K])`` for full profiles."""
    for K in TABLE4_K:
        for v in TABLE4_V:
            r = optimize_full(DesignProblem(K, K, v))
            yield K, v, r.support, list(r.certificate.per_depth)


def render_table(which: int, fmt: str) -> str:
    out = io.StringIO()
    if which == 1:
        header = ["K", "S"] + [f"v={v}" for v in TABLE1_V]
        rows = [[K, S] + ds for K, S, ds in table1_rows()]
    elif which == 2:
        header = ["K", "S"] + [f"v={v}" for v in TABLE2_V]
        rows = [[K, S] + cells for K, S, cells in table2_rows()]
    elif which == 4:
        dmax = max(TABLE4_K)
        header = ["K", "v"] + [f"d={d}" for d in range(1, dmax + 1)] + ["support"]
        rows = []
        for K, v, support, vals in table4_rows():
            cells = []
            for d in range(1, dmax + 1):
                if d > K:
                    cells.append("")
                    continue
                text = fmt_variance(vals[d - 1])
                if fmt == "md" and d in support:
                    text = f"**{text}**"
                cells.append(text)
            rows.append([K, v] + cells + ["|".join(map(str, support))])
    else:
        raise UsageError(f"unknown table {which}")
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        out.write("| " + " | ".join(header) + " |\n")
        out.write("|" + "---|" * len(header) + "\n")
        for row in rows:
            out.write("| " + " | ".join(str(x) for x in row) + " |\n")
    return out.getvalue()


def cmd_table(args) -> int:
    text = render_table(args.which, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- export -----------------------------------------------------------------


def export_rows(problem: DesignProblem, d: int):
    """Rows ``(pair_id, attr_subset, alt1, alt2, weight)`` of the uniform design on depth ``d``."""
    weight = Fraction(1, orbit_count(problem, d))
    for pair_id, pair in enumerate(enumerate_orbit(problem, d)):
        subset = [k + 1 for k in pair.attribute_subset]
        yield pair_id, subset, list(pair.first.levels), list(pair.second.levels), weight


def write_export(problem: DesignProblem, d: int, fmt: str, stream) -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["pair_id", "attr_subset", "alt1", "alt2", "weight"])
        for pair_id, subset, a, b, w in export_rows(problem, d):
            writer.writerow([pair_id, "|".join(map(str, subset)), "|".join(map(str, a)),
                             "|".join(map(str, b)), format(float(w), ".17g")])
    else:
        doc = {
            "format": DESIGN_FORMAT,
            "problem": {"K": problem.K, "S": problem.S, "v": problem.v},
            "depth": d,
            "weights": {str(d): "1"},
            "pairs": [
                {"pair_id": i, "attr_subset": s, "alt1": a, "alt2": b, "weight": str(w)}
                for i, s, a, b, w in export_rows(problem, d)
            ],
        }
        json.dump(doc, stream, indent=1)
        stream.write("\n")


def cmd_export(args) -> int:
    problem = _problem(args)
    try:
        problem.check_depth(args.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n = orbit_count(problem, args.depth)
    cap = args.cap if args.cap is not None else default_cap()
    if n > cap:
        print(f"error: depth {args.depth} has {n} pairs, cap is {cap}", file=sys.stderr)
        return EXIT_CAP
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_export(problem, args.depth, args.format, fh)
    else:
        write_export(problem, args.depth, args.format, sys.stdout)
    return EXIT_OK


# -- verify -----------------------------------------------------------------


def load_design(path: str | Path):
    """Read a design file.

    Returns ``(problem, invariant_design, explicit_rows)`` where
    ``explicit_rows`` is ``None`` unless the file lists individual pairs.
    Accepts ``export`` output (JSON or CSV) and ``solve --json`` reports.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return _load_csv(text)
    doc = json.loads(text)
    prob = doc["problem"]
    problem = DesignProblem(int(prob["K"]), int(prob["S"]), int(prob["v"]))
    if "pairs" in doc:
        rows = [(r["alt1"], r["alt2"], Fraction(r["weight"])) for r in doc["pairs"]]
        return problem, _invariant_from_rows(problem, rows), rows
    weights = {}
    for d, w in doc["weights"].items():
        weights[int(d)] = Fraction(w) if isinstance(w, str) else float(w)
    return problem, InvariantDesign(problem, weights), None


def _load_csv(text: str):
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for r in reader:
        a = [int(x) for x in r["alt1"].split("|")]
        b = [int(x) for x in r["alt2"].split("|")]
        # decimal weights of 1/N_d: recover the exact fraction
        rows.append((a, b, Fraction(r["weight"]).limit_denominator(10**15)))
    if not rows:
        raise UsageError("design file has no rows")
    K = len(rows[0][0])
    S = sum(1 for x in rows[0][0] if x)
    v = max(max(max(a), max(b)) for a, b, _ in rows)
    problem = DesignProblem(K, S, v)
    return problem, _invariant_from_rows(problem, rows), rows


def _invariant_from_rows(problem: DesignProblem, rows) -> InvariantDesign:
    weights: dict[int, Fraction] = {}
    for a, b, w in rows:
        d = sum(x != y for x, y in zip(a, b))
        weights[d] = weights.get(d, Fraction(0)) + Fraction(w)
    return InvariantDesign(problem, weights)


def run_verify(problem: DesignProblem, design: InvariantDesign | None, rows=None,
               cap: int | None = None, emit=print) -> bool:
    """Run the oracle suite; returns True iff every check passes."""
    total = comb(problem.K, problem.S) * problem.v ** (2 * problem.S)
    cap = default_cap() if cap is None else cap
    if total > cap:
        raise CapExceeded(total, cap)
    ok = True

    def record(report):
        nonlocal ok
        emit(report.line())
        ok = ok and report.passed

    for d in range(problem.S + 1):
        record(check_lemma1(problem, d, cap))
    if problem.v <= 6:
        record(check_appendix_sums(problem.v))
    if problem.v <= 8:
        record(check_variance_elements(problem.v))
    if design is None:
        result = optimize_full(problem)
        design = result.design
    if rows is not None:
        explicit = explicit_info_matrix(problem, rows)
        invariant = enumerate_info_matrix(problem, design, cap)
        same = explicit == invariant
        emit(f"[{'PASS' if same else 'FAIL'}] design file information matrix matches invariant design "
             f"{dict(design.weights)}")
        ok = ok and same
    if info_summary(design).nonsingular:
        record(check_variance_function(problem, design, cap))
    else:
        emit(f"[SKIP] variance function: design {dict(design.weights)} has a singular information matrix")
    return ok


def cmd_verify(args) -> int:
    if args.design:
        try:
            problem, design, rows = load_design(args.design)
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read design file: {exc}") from exc
        if args.attributes is not None and (args.attributes, args.strength, args.levels) != (
                problem.K, problem.S, problem.v):
            raise UsageError("design file does not match -K/-S/-v")
    else:
        if args.attributes is None or args.strength is None or args.levels is None:
            raise UsageError("verify needs -K, -S and -v (or --design)")
        problem, design, rows = _problem(args), None, None
    try:
        ok = run_verify(problem, design, rows, args.cap)
    except CapExceeded as exc:
        print(f"error: refusing to enumerate {exc.pairs} pairs (cap {exc.cap}); "
              "raise --cap or PAIROPT_CAP", file=sys.stderr)
        return EXIT_CAP
    print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_CERT


# -- entry point ------------------------------------------------------------


def _add_problem_flags(p, required=True):
    p.add_argument("-K", "--attributes", type=int, required=required, help="number of attributes")
    p.add_argument("-S", "--strength", type=int, required=required, help="profile strength")
    p.add_argument("-v", "--levels", type=int, required=required, help="levels per attribute")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="optimal depth or D-optimal invariant design")
    _add_problem_flags(p)
    p.add_argument("--target", choices=["main", "first-order", "second-order", "full"], default="full")
    p.add_argument("--tolerance", type=float, default=WEIGHT_TOL, help="weight convergence tolerance")
    p.add_argument("--kw-tolerance", type=float, default=KW_TOL, help="equivalence-check tolerance")
    p.add_argument("--precision", type=int, default=3, help="decimals for printed weights")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="regenerate a results table")
    p.add_argument("--which", type=int, choices=[1, 2, 4], required=True)
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="brute-force check of the closed forms")
    _add_problem_flags(p, required=False)
    p.add_argument("--cap", type=int, default=None, help="maximum number of enumerated pairs")
    p.add_argument("--design", help="design file from `export` or `solve --json`")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="write the pairs of a uniform depth design")
    _add_problem_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pairopt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
