"""Command-line front end.

    shearlab classify --spec F [--point "u1,u2"] [--grid] [--tol T] [--format text|json]
    shearlab scan --spec F [--grid] [--tol T] [--format text|json]
    shearlab catalog [--list | --run NAME | --all | --show NAME]
    shearlab check --spec F

Exit status: 0 success, 1 validation/classification error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import catalog, specfile
from .errors import ShearlabError
from .immersion import frame_at
from .shear import ScanResult, ShearReport, classify_at, constancy_scan
from .tolerances import ENV_VAR, Tolerances


def _tolerances(args) -> Tolerances:
    if args.tol is not None:
        return Tolerances.from_rank(args.tol)
    return Tolerances.from_env()


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        values = [float(p) for p in text.split(",")]
    except ValueError:
        raise ShearlabError(f"--point must be comma-separated numbers, got {text!r}") from None
    if len(values) != n:
        raise ShearlabError(f"--point needs {n} values, got {len(values)}")
    return np.array(values)


def _select_points(spec, args) -> list[np.ndarray]:
    if getattr(args, "point", None):
        return [_parse_point(p, spec.immersion.n) for p in args.point]
    if args.grid:
        points = spec.grid()
        if not points:
            raise ShearlabError("--grid given but the spec file has no grid[...] entries")
        return points
    points = spec.samples()
    if not points:
        raise ShearlabError("no sample points: pass --point or add a [samples] section")
    return points


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def _report_text(r: ShearReport) -> str:
    c = r.checks
    lines = [
        f"point {_fmt_vec(r.point)}: {r.label}",
        f"  n={r.n} k={r.k} d={r.d} m={r.m} intersection={r.intersection_dim}",
        f"  shear basis: {', '.join(_fmt_vec(s) for s in r.shear_basis.T) or '-'}",
        f"  umbilical basis: {', '.join(_fmt_vec(s) for s in r.umbilical_basis.T) or '-'}",
        f"  checks: dims_sum={c.dims_sum} wedge={c.wedge} operator_rank={c.operator_rank}"
        f" duality_residual={c.duality_residual:.2e}"
        + ("" if c.direct_sum is None else f" direct_sum={c.direct_sum}"),
    ]
    if r.G is not None:
        lines.append(f"  G = {_fmt_vec(r.G)}")
    return "\n".join(lines)


def _error_dict(u, exc) -> dict:
    return {"point": np.asarray(u).tolist(), "error": type(exc).__name__, "message": str(exc)}


def cmd_classify(args, out) -> int:
    spec = specfile.load(args.spec)
    tol = _tolerances(args)
    points = _select_points(spec, args)
    scan = constancy_scan(spec.immersion, points, tol, workers=args.workers)
    status = 0
    payload = []
    for u, o in zip(scan.points, scan.outcomes):
        if isinstance(o, ShearReport):
            payload.append(o.as_dict())
            if args.format == "text":
                print(_report_text(o), file=out)
        else:
            status = 1
            payload.append(_error_dict(u, o))
            print(f"error at u={u.tolist()}: {o}", file=sys.stderr)
    if args.format == "json":
        print(json.dumps(payload[0] if len(payload) == 1 else payload, indent=2), file=out)
    return status


def _scan_dict(scan: ScanResult) -> dict:
    return {
        "verdict": scan.verdict,
        "dims": None if scan.dims is None else {"d": scan.dims[0], "m": scan.dims[1]},
        "partition": [
            {"d": d, "m": m, "points": [scan.points[i].tolist() for i in idx]}
            for (d, m), idx in scan.partition.items()
        ],
        "errors": [_error_dict(scan.points[i], e) for i, e in scan.errors],
    }


def cmd_scan(args, out) -> int:
    spec = specfile.load(args.spec)
    tol = _tolerances(args)
    points = _select_points(spec, args)
    scan = constancy_scan(spec.immersion, points, tol, workers=args.workers)
    if args.format == "json":
        print(json.dumps(_scan_dict(scan), indent=2), file=out)
    else:
        print(f"{len(points)} points: {scan.verdict}", file=out)
        for (d, m), idx in scan.partition.items():
            pts = ", ".join(_fmt_vec(scan.points[i]) for i in idx)
            print(f"  (d={d}, m={m}) at {len(idx)} point(s): {pts}", file=out)
        for i, e in scan.errors:
            print(f"  error at {_fmt_vec(scan.points[i])}: {e}", file=out)
    return 1 if scan.errors else 0


def cmd_catalog(args, out) -> int:
    tol = _tolerances(args)
    if args.show:
        print(catalog.spec_text(args.show), end="", file=out)
        return 0
    if args.run or args.all:
        names = [args.run] if args.run else list(catalog.ENTRIES)
        status = 0
        for name in names:
            res = catalog.run_entry(name, tol)
            tag = "PASS" if res.passed else "FAIL"
            print(f"{tag} {name} ({res.points} points, {res.elapsed:.3f}s)", file=out)
            for f in res.failures:
                print(f"     {f}", file=out)
            status |= 0 if res.passed else 1
        return status
    for e in catalog.list_entries():
        x = e.expected
        print(f"{e.name:20s} d={x.d} m={x.m} {x.label:26s} intersection={x.intersection_dim}", file=out)
    return 0


def cmd_check(args, out) -> int:
    spec = specfile.load(args.spec)
    tol = _tolerances(args)
    imm = spec.immersion
    print(
        f"ambient dimension {imm.ambient.dimension}, signature {imm.ambient.signature}; "
        f"n={imm.n}, k={imm.k}",
        file=out,
    )
    status = 0
    for u in spec.samples():
        try:
            frame_at(imm, u, tol)
            print(f"  ok {_fmt_vec(u)}", file=out)
        except ShearlabError as exc:
            status = 1
            print(f"  error at {_fmt_vec(u)}: {exc}", file=out)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearlab",
        description="Shear and umbilical spaces of spacelike immersions.",
        epilog=f"The environment variable {ENV_VAR} sets the default --tol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_spec=True):
        if with_spec:
            p.add_argument("--spec", required=True, help="spec file")
        p.add_argument("--tol", type=_positive, default=None, help="relative rank threshold (default 1e-9)")

    p = sub.add_parser("classify", help="classify the umbilical structure at points")
    common(p)
    p.add_argument("--point", action="append", help='parameter point "u1,u2,..." (repeatable)')
    p.add_argument("--grid", action="store_true", help="use the grid from [samples]")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", help="check that (d, m) is constant over the samples")
    common(p)
    p.add_argument("--grid", action="store_true", help="use only the grid from [samples]")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("catalog", help="list or run the built-in reference immersions")
    common(p, with_spec=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--list", action="store_true")
    g.add_argument("--run", metavar="NAME")
    g.add_argument("--all", action="store_true")
    g.add_argument("--show", metavar="NAME", help="print the entry's spec file")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("check", help="parse a spec file and validate frames at its samples")
    common(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except ShearlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # malformed SHEARLAB_TOL and similar
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
