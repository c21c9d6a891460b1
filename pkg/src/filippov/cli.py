"""``filippov`` command-line front end.

Exit status: 0 on success, 1 when an analysis or expectation fails, 2 on
unusable input (missing file, invalid scenario, bad flags).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .core import classify_sigma_point, find_singularities
from .errors import FilippovError, ScenarioError
from .manifold import poincare_hopf_check
from .regularization import DEFAULT_EPS, check_invariance
from .scenario import format_residual, load_planar_field, load_scenario, run
from .winding import ball_index, field_curves, index_at_singularity, write_curves_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(n):
    def parse(text):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if n is not None and len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _eps_list(text):
    vals = _floats(None)(text)
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError(f"eps values must be positive: {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="filippov", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run every analysis of a scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", help="directory for report.json and curve CSVs "
                                 "(default: filippov-results/<scenario name>)")

    c = sub.add_parser("classify", help="classify a point of the switching curve")
    c.add_argument("--field", required=True)
    c.add_argument("--point", required=True, type=_floats(2), metavar="X,Y")
    c.add_argument("--class-tol", type=_positive, default=None)

    i = sub.add_parser("index", help="index of the field on a circle")
    i.add_argument("--field", required=True)
    i.add_argument("--center", required=True, type=_floats(2), metavar="X,Y")
    i.add_argument("--radius", required=True, type=_positive)

    f = sub.add_parser("find", help="locate singularities in a box")
    f.add_argument("--field", required=True)
    f.add_argument("--box", type=_floats(4), metavar="X0,Y0,X1,Y1")
    f.add_argument("--grid", type=int, default=64)
    f.add_argument("--no-index", action="store_true", help="skip the per-singularity index")

    g = sub.add_parser("reg-check", help="compare with the regularized rotation number")
    g.add_argument("--field", required=True)
    g.add_argument("--center", required=True, type=_floats(2), metavar="X,Y")
    g.add_argument("--radius", required=True, type=_positive)
    g.add_argument("--eps", type=_eps_list, default=list(DEFAULT_EPS), metavar="E1,E2,...")

    h = sub.add_parser("ph", help="Poincare-Hopf check of a manifold scenario")
    h.add_argument("--scenario", required=True)
    h.add_argument("--grid", type=int, default=None)

    e = sub.add_parser("emit-curves", help="write gamma_plus.csv and gamma_minus.csv")
    e.add_argument("--field", required=True)
    e.add_argument("--center", required=True, type=_floats(2), metavar="X,Y")
    e.add_argument("--radius", required=True, type=_positive)
    e.add_argument("--out", required=True)
    return p


def _check_ball(Z, center, radius):
    if not Z.domain.contains_ball(center, radius):
        raise ScenarioError(f"--center/--radius: ball is not inside the domain {list(Z.domain.as_tuple())}")


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    out = args.out or os.path.join("filippov-results", sc.name)
    print(f"scenario {sc.name} ({sc.kind})")
    result = run(sc, out)
    for o in result.outcomes:
        for line in o.lines:
            print(line)
    print(f"{'PASS' if result.passed else 'FAIL'} ({sum(o.passed for o in result.outcomes)}"
          f"/{len(result.outcomes)} analyses); report in {os.path.join(out, 'report.json')}")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_classify(args) -> int:
    Z = load_planar_field(args.field)
    kw = {} if args.class_tol is None else {"tol": args.class_tol}
    c = classify_sigma_point(Z, args.point, **kw)
    print(json.dumps({"point": args.point, "tag": c.tag.value,
                      "lie_plus": c.lie_plus, "lie_minus": c.lie_minus}, sort_keys=True))
    return EXIT_OK


def cmd_index(args) -> int:
    Z = load_planar_field(args.field)
    _check_ball(Z, args.center, args.radius)
    b = ball_index(Z, args.center, args.radius)
    print(f"index={b.index} residual={format_residual(b.residual)}")
    return EXIT_OK


def cmd_find(args) -> int:
    Z = load_planar_field(args.field)
    if args.grid < 8:
        raise ScenarioError("--grid: must be at least 8")
    box = args.box or list(Z.domain.as_tuple())
    sings = find_singularities(Z, box, args.grid)
    print(f"{'kind':<20} {'x':>14} {'y':>14}" + ("" if args.no_index else f" {'index':>6}"))
    status = EXIT_OK
    for s in sings:
        row = f"{s.kind.value:<20} {s.location[0]:>14.9f} {s.location[1]:>14.9f}"
        if not args.no_index:
            try:
                row += f" {index_at_singularity(Z, s, sings, args.grid):>6d}"
            except FilippovError as exc:
                row += f" {'?':>6} ({type(exc).__name__})"
                status = EXIT_FAIL
        print(row)
    return status


def cmd_reg_check(args) -> int:
    Z = load_planar_field(args.field)
    _check_ball(Z, args.center, args.radius)
    rep = check_invariance(Z, args.center, args.radius, args.eps)
    print(f"filippov index={rep.filippov_index}" + (f" error={rep.error}" if rep.error else ""))
    for e in rep.entries:
        line = f"phi={e.phi:<13} eps={e.epsilon:g} index={e.index}"
        if e.epsilon_used is not None and e.epsilon_used != e.epsilon:
            line += f" (eps used {e.epsilon_used:g})"
        if e.error:
            line += f" error={e.error}"
        print(line)
    print(f"all equal: {rep.all_equal}")
    return EXIT_OK if rep.all_equal else EXIT_FAIL


def cmd_ph(args) -> int:
    sc = load_scenario(args.scenario)
    if sc.manifold is None:
        raise ScenarioError(f"{args.scenario}: not a manifold scenario")
    grid = args.grid or sc.grid
    if grid < 8:
        raise ScenarioError("--grid: must be at least 8")
    rep = poincare_hopf_check(sc.manifold, grid, sc.tol)
    for s in rep.singularities:
        print(f"chart={s.chart:<6} x={s.location[0]: .9f} y={s.location[1]: .9f} {s.kind:<20} index={s.index}")
    for e in rep.errors:
        print(f"error: {e}")
    print(rep.summary_line())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_emit_curves(args) -> int:
    Z = load_planar_field(args.field)
    _check_ball(Z, args.center, args.radius)
    curves = field_curves(Z, args.center, args.radius)
    for path in write_curves_csv(curves, args.out):
        print(path)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run, "classify": cmd_classify, "index": cmd_index, "find": cmd_find,
    "reg-check": cmd_reg_check, "ph": cmd_ph, "emit-curves": cmd_emit_curves,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FilippovError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
