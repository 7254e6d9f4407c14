"""Command-line front end.

    mvfields eval     [FILE] -f NAME -p X1,...,XN [-c CHART]
    mvfields derive   [FILE] -f NAME -a DIR [-p POINT] [-c CHART] [--fd H]
    mvfields check    [FILE] [--samples N] [--seed S] [--tol T] [--json]
    mvfields frames   [FILE] -c CHART [-p POINT]
    mvfields jacobian [FILE] -c CHART [-p POINT] [--inverse]

FILE defaults to the bundled fixture.  Exit codes: 0 success, 1 parse error,
2 unknown name / domain or argument error, 3 identity failure, 4 singular
Jacobian.  Negative literals need the ``=`` form, e.g. ``-p=-1,2``.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import expr as E
from .algebra import Multivector, format_multivector, format_number
from .calculus import dod
from .charts import Chart
from .checks import Fixture, run_suite
from .errors import MvfError, SingularJacobianError
from .fields import MultivectorField, check_points_in_box
from .parser import FieldFile, ParseError, parse

EXIT_OK, EXIT_PARSE, EXIT_REFERENCE, EXIT_IDENTITY, EXIT_SINGULAR = 0, 1, 2, 3, 4
DISPLAY_DECIMALS = 12


class UsageError(Exception):
    """Bad reference or literal on the command line (exit 2)."""


def bundled_fixture() -> Path:
    return Path(str(resources.files("mvfields") / "data" / "standard.mvf"))


def load(path: str | None) -> FieldFile:
    p = Path(path) if path else bundled_fixture()
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {p}: {err.strerror or err}") from None
    return parse(text)


def parse_reals(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated reals, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what} needs {n} components, got {len(vals)}")
    return vals


def show(v: float) -> str:
    """Display value rounded to 12 decimals (``-0`` shown as ``0``)."""
    return format_number(round(float(v), DISPLAY_DECIMALS) + 0.0)


def show_mv(x: Multivector) -> str:
    return format_multivector(Multivector(x.n, np.round(x.coefficients, DISPLAY_DECIMALS) + 0.0))


# ---------------------------------------------------------------------------
# resolution of names
# ---------------------------------------------------------------------------

def get_chart(fx: Fixture, name: str) -> Chart:
    if name in fx.charts:
        return fx.charts[name]
    if name in ("identity", "canonical"):
        return Chart.identity(fx.n, fx.domain)
    raise UsageError(f"unknown chart {name!r}")


def get_field(fx: Fixture, name: str) -> MultivectorField:
    try:
        return fx.fields[name]
    except KeyError:
        raise UsageError(f"unknown field {name!r}") from None


def get_direction(fx: Fixture, text: str | None):
    if text is None:
        raise UsageError("a direction is required (-a v1,...,vn or -a FIELD)")
    if text in fx.fields:
        a = fx.fields[text]
        if not a.is_vector_field():
            raise UsageError(f"direction field {text!r} is not a vector field")
        return a
    return Multivector.vector(parse_reals(text, fx.n, "direction"))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_eval(args, fx: Fixture, out) -> int:
    if args.field is None or args.point is None:
        raise UsageError("eval needs -f FIELD and -p POINT")
    X = get_field(fx, args.field)
    point = parse_reals(args.point, fx.n, "point")
    if args.chart:
        X = get_chart(fx, args.chart).pull(X)
    value = X.evaluate(point)
    if args.json:
        out.write(json.dumps({"field": args.field, "chart": args.chart, "point": point,
                              "value": format_multivector(value)}) + "\n")
    else:
        out.write(format_multivector(value) + "\n")
    return EXIT_OK


def cmd_derive(args, fx: Fixture, out) -> int:
    if args.field is None:
        raise UsageError("derive needs -f FIELD")
    X = get_field(fx, args.field)
    a = get_direction(fx, args.direction)
    if args.chart:
        chart = get_chart(fx, args.chart)
        X = chart.pull(X)
        if isinstance(a, MultivectorField):
            a = chart.pull(a)
    D = dod(a, X)
    record = {"field": args.field, "chart": args.chart, "expr": D.render()}
    lines = [f"expr: {D.render()}"]
    if args.point is not None:
        point = parse_reals(args.point, fx.n, "point")
        value = D.evaluate(point)
        record["point"] = point
        record["value"] = format_multivector(value)
        lines.append(f"value: {format_multivector(value)}")
        if args.fd is not None:
            if not args.fd > 0:
                raise UsageError("--fd step must be positive")
            from .calculus import dod_fd
            check_points_in_box(np.array([point]), X.domain)
            fd = Multivector(fx.n, dod_fd(a, X, [point], args.fd)[0])
            gap = float(np.max(np.abs(fd.coefficients - value.coefficients)))
            record["fd"] = format_multivector(fd)
            record["discrepancy"] = gap
            lines.append(f"fd: {format_multivector(fd)}")
            lines.append(f"discrepancy: {gap:.3e}")
    elif args.fd is not None:
        raise UsageError("--fd needs a point (-p)")
    out.write((json.dumps(record) if args.json else "\n".join(lines)) + "\n")
    return EXIT_OK


def cmd_check(args, fx_file: FieldFile, out) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if args.tol is not None and not args.tol > 0:
        raise UsageError("--tol must be positive")
    reports = run_suite(fx_file, samples=args.samples, seed=args.seed, tol=args.tol)
    for r in reports:
        out.write((r.to_json() if args.json else r.line()) + "\n")
    failed = sum(not r.passed for r in reports)
    if not args.json:
        out.write(f"{len(reports) - failed}/{len(reports)} identities passed\n")
    return EXIT_IDENTITY if failed else EXIT_OK


def _chart_point(args, fx: Fixture, chart: Chart) -> list[float] | None:
    if args.point is None:
        return None
    point = parse_reals(args.point, fx.n, "point")
    # a singular locus is reported before any domain complaint
    chart.check_nonsingular([point])
    check_points_in_box(np.array([point]), chart.domain)
    return point


def cmd_frames(args, fx: Fixture, out) -> int:
    if not args.chart:
        raise UsageError("frames needs -c CHART")
    chart = get_chart(fx, args.chart)
    point = _chart_point(args, fx, chart)
    groups = [("covariant", "e", chart.covariant_frame()),
              ("contravariant", "e^", chart.contravariant_frame())]
    records = []
    for label, sym, frame in groups:
        if not args.json:
            out.write(f"{label}:\n")
        for k, f in enumerate(frame, start=1):
            name = f"{sym}{k}" if sym == "e^" else f"e{k}"
            text = show_mv(f.evaluate(point)) if point is not None else f.render()
            records.append({"frame": label, "index": k, "value": text})
            if not args.json:
                out.write(f"  {name} = {text}\n")
    if args.json:
        for r in records:
            out.write(json.dumps(r) + "\n")
    return EXIT_OK


def cmd_jacobian(args, fx: Fixture, out) -> int:
    if not args.chart:
        raise UsageError("jacobian needs -c CHART")
    chart = get_chart(fx, args.chart)
    point = _chart_point(args, fx, chart)
    J = chart.jacobian_inverse() if args.inverse else chart.jacobian()
    label = "Jinv" if args.inverse else "J"
    nodes = J.matrix_nodes()
    values = J.tables([point], check_domain=False)[0] if point is not None else None
    for mu in range(fx.n):
        if values is not None:
            column = [show(values[nu, mu]) for nu in range(fx.n)]
        else:
            column = [E.render(nodes[nu][mu]) for nu in range(fx.n)]
        if args.json:
            out.write(json.dumps({"extensor": label, "column": mu + 1, "entries": column}) + "\n")
        else:
            out.write(f"{label}(b{mu + 1}) = {', '.join(column)}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvfields", description="Multivector and extensor field calculus.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", nargs="?", help=".mvf file (default: bundled fixture)")
        p.add_argument("--json", action="store_true", help="emit JSON lines")
        return p

    p = add("eval", "evaluate a field at a point")
    p.add_argument("-f", "--field")
    p.add_argument("-p", "--point")
    p.add_argument("-c", "--chart", help="interpret the point in this chart's coordinates")

    p = add("derive", "directional derivative of a field")
    p.add_argument("-f", "--field")
    p.add_argument("-a", "--direction", help="v1,...,vn or the name of a vector field")
    p.add_argument("-p", "--point")
    p.add_argument("-c", "--chart", help="differentiate in this chart's coordinates")
    p.add_argument("--fd", type=float, metavar="H", help="also report a central difference with step H")

    p = add("check", "run the identity suite")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="override every tolerance")

    p = add("frames", "covariant and contravariant frames of a chart")
    p.add_argument("-c", "--chart")
    p.add_argument("-p", "--point")

    p = add("jacobian", "Jacobian field of a chart")
    p.add_argument("-c", "--chart")
    p.add_argument("-p", "--point")
    p.add_argument("--inverse", action="store_true", help="show the inverse Jacobian")
    return parser


COMMANDS = {"eval": cmd_eval, "derive": cmd_derive, "frames": cmd_frames, "jacobian": cmd_jacobian}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        ff = load(args.input)
        if args.command == "check":
            return cmd_check(args, ff, out)
        return COMMANDS[args.command](args, Fixture.from_file(ff), out)
    except ParseError as e:
        err.write(f"{args.input or bundled_fixture()}:{e.diagnostic()}\n")
        return EXIT_PARSE
    except SingularJacobianError as e:
        err.write(f"error: {e}\n")
        return EXIT_SINGULAR
    except (UsageError, MvfError) as e:
        err.write(f"error: {e}\n")
        return EXIT_REFERENCE
    except BrokenPipeError:
        # output piped into e.g. `head`; nothing left to report
        sys.stderr = None
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
