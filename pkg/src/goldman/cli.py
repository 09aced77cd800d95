"""Command-line front end.

    goldman sample   --case i --k 1 --variety R --seed 7 --count 3
    goldman flow     point.jsonl --flow composite --t 0,pi,2pi
    goldman verify   --suite theorem --case i,ii,iii --k 1..3 --trials 200 --seed 1
    goldman orbit-eq a.json b.json

Exit codes: 0 success, 1 verification failure, 2 usage / IO / input error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

import numpy as np

from . import flows, repvar, verify
from .errors import DegenerateElement, GoldmanError, Inconclusive, SpecMismatch
from .su2 import Su2Element
from .surfaces import CASES, SurfaceSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- argument parsing helpers ---------------------------------------------

def parse_cases(text):
    cases = [c.strip().lower() for c in text.split(",") if c.strip()]
    for c in cases:
        if c not in CASES:
            raise UsageError(f"unknown case {c!r}; expected one of {', '.join(CASES)}")
    return cases


def parse_ks(text):
    """``"2"``, ``"1,3"`` or an inclusive range ``"1..3"``."""
    ks = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise UsageError(f"empty k range {part!r}")
            ks.extend(range(lo, hi + 1))
        elif part.isdigit():
            ks.append(int(part))
        else:
            raise UsageError(f"cannot parse k {part!r}")
    return ks


_PI_TERM = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/((?:\d+(?:\.\d*)?|\.\d+)))?$")


def parse_time(token):
    """A float, or a multiple of pi such as ``pi``, ``-2pi``, ``pi/2``, ``3*pi/4``."""
    token = token.strip().lower()
    try:
        return float(token)
    except ValueError:
        pass
    m = _PI_TERM.match(token)
    if not m:
        raise UsageError(f"cannot parse time {token!r}")
    coef = m.group(1)
    if coef in ("", "+"):
        value = 1.0
    elif coef == "-":
        value = -1.0
    else:
        value = float(coef)
    value *= math.pi
    if m.group(2):
        value /= float(m.group(2))
    return value


def parse_element(text):
    try:
        coords = [float(v) for v in text.split(",")]
        return Su2Element(*coords)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--x must be four comma-separated numbers of unit norm: {exc}")


def build_specs(case_text, k_text, allow_k0):
    try:
        return [SurfaceSpec(c, k, allow_k0=allow_k0) for c in parse_cases(case_text) for k in parse_ks(k_text)]
    except ValueError as exc:
        raise UsageError(str(exc))


def read_records(path):
    """Point records from a JSON file or a JSON-lines stream."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    text = text.strip()
    if not text:
        return []
    try:
        data = json.loads(text)
        return data if isinstance(data, list) else [data]
    except json.JSONDecodeError:
        pass
    try:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is neither JSON nor JSON lines: {exc}")


def _load_point(path, args):
    records = read_records(path)
    if not records:
        raise UsageError(f"{path} contains no point")
    record = records[0]
    if "point" not in record:
        record = {"point": record}
    if "spec" in record:
        spec = SurfaceSpec.from_json(record["spec"], allow_k0=getattr(args, "allow_k0", False))
    elif getattr(args, "case", None) and getattr(args, "k", None):
        spec = SurfaceSpec(args.case, int(args.k), allow_k0=args.allow_k0)
    else:
        raise UsageError(f"{path}: record has no spec; pass --case and --k")
    try:
        point = repvar.point_from_json(record["point"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed point: {exc}")
    return spec, point, record


def _write(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands --------------------------------------------------------------

def cmd_sample(args):
    spec = SurfaceSpec(args.case, args.k, allow_k0=args.allow_k0)
    if args.variety == "Nx" and args.x is None:
        raise UsageError("--x is required for --variety Nx")
    if args.variety != "Nx" and args.x is not None:
        raise UsageError("--x is only meaningful with --variety Nx")
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    rng = np.random.default_rng(args.seed)
    x = parse_element(args.x) if args.x is not None else None
    lines = []
    for index in range(args.count):
        if args.variety == "R":
            point = repvar.sample_R(spec, rng)
        elif args.variety == "Rtilde":
            point = repvar.sample_Rtilde(spec, rng)
        else:
            point = repvar.sample_Nx(spec, x, rng)
        record = {"spec": spec.to_json(), "variety": args.variety}
        if x is not None:
            record["x"] = x.to_json()
        record.update({"seed": args.seed, "index": index, "point": point.to_json()})
        lines.append(json.dumps(record) + "\n")
    _write("".join(lines), args.out)
    return EXIT_OK


def cmd_flow(args):
    spec, point, record = _load_point(args.point_file, args)
    t_values = [parse_time(tok) for tok in args.t.split(",") if tok.strip()]
    if args.flow == "xi" and isinstance(point, repvar.DoubleRepPoint):
        raise UsageError("flow xi acts on points of R, got a double-cover point")
    if args.flow != "xi" and isinstance(point, repvar.RepPoint):
        raise UsageError(f"flow {args.flow} acts on double-cover points, got a point of R")
    try:
        points, residuals = flows.trajectory(point, args.flow, t_values, spec)
    except DegenerateElement as exc:
        print(f"error: flow undefined because {exc.name} is +-1: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = {
        "spec": spec.to_json(),
        "flow": args.flow,
        "t_values": t_values,
        "points": [p.to_json() for p in points],
        "residuals": residuals,
    }
    if "x" in record and isinstance(point, repvar.DoubleRepPoint):
        x = Su2Element.from_json(record["x"])
        out["x"] = x.to_json()
        out["nx_residuals"] = [repvar.in_Nx(p, x, spec)[1] for p in points]
    _write(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args):
    specs = build_specs(args.case, args.k, args.allow_k0)
    fixtures = []
    for path in args.fixture or []:
        fixtures.extend(read_records(path))
    if args.trials is not None and args.trials < 0:
        raise UsageError("--trials must be non-negative")
    tol = args.tol if args.tol is not None else verify.env_tolerance()
    report = verify.run_suite(
        args.suite,
        specs,
        trials=args.trials,
        seed=args.seed,
        tol=tol,
        fixtures=fixtures,
        negative_control=args.negative_control,
        jobs=args.jobs,
    )
    _write(json.dumps(report.to_json(), indent=1) + "\n", args.out)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status} suite={report.suite} failures={len(report.failures)} "
        f"max_residual/tol={report.max_residual:.3g} wall={report.wall_time:.2f}s",
        file=sys.stderr,
    )
    for f in report.failures[:10]:
        print(f"  failed {f['identity']} spec={f['spec']} trial={f['trial']} residual={f['residual']:.3e}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def orbit_verdict(spec_a, a, spec_b, b):
    """``(verdict, witness_json)`` comparing the classes of two points."""
    if spec_a.to_json() != spec_b.to_json():
        raise SpecMismatch(f"points belong to different surfaces: {spec_a} vs {spec_b}")
    if type(a) is not type(b):
        raise SpecMismatch("cannot compare a point of R with a double-cover point")
    try:
        if isinstance(a, repvar.DoubleRepPoint):
            w = repvar.same_orbit_double(a, b, spec_a)
            witness = None if w is None else {"g": w[0].to_json(), "h": w[1].to_json()}
        else:
            w = repvar.same_orbit(a, b, spec_a)
            witness = None if w is None else {"g": w.to_json()}
    except Inconclusive:
        return "inconclusive", None
    return ("equal", witness) if witness is not None else ("not_equal", None)


def cmd_orbit_eq(args):
    spec_a, a, _ = _load_point(args.file_a, args)
    spec_b, b, _ = _load_point(args.file_b, args)
    verdict, witness = orbit_verdict(spec_a, a, spec_b, b)
    out = {"verdict": verdict, "spec": spec_a.to_json()}
    if witness is not None:
        out["witness"] = witness
    _write(json.dumps(out) + "\n", args.out)
    return EXIT_OK


# --- entry point -----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="goldman", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample points of R, Rtilde or N_x")
    p.add_argument("--case", required=True, choices=CASES)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--variety", required=True, choices=("R", "Rtilde", "Nx"))
    p.add_argument("--x", help="w,x,y,z of the N_x parameter")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--allow-k0", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("flow", help="flow a point over a list of times")
    p.add_argument("point_file")
    p.add_argument("--flow", required=True, choices=tuple(flows.FLOWS))
    p.add_argument("--t", required=True, help="comma-separated times; multiples of pi allowed")
    p.add_argument("--case", choices=CASES)
    p.add_argument("--k", type=int)
    p.add_argument("--allow-k0", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=verify.SUITES + ("all",))
    p.add_argument("--case", default="i,ii,iii")
    p.add_argument("--k", default="1..3")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="primary tolerance (default per suite, or $GOLDMAN_TOL)")
    p.add_argument("--fixture", action="append", help="extra point records to check")
    p.add_argument("--negative-control", action="store_true", help="add the built-in corrupted fixture")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--allow-k0", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit-eq", help="decide whether two points have the same class")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--case", choices=CASES)
    p.add_argument("--k", type=int)
    p.add_argument("--allow-k0", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit_eq)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, SpecMismatch, GoldmanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
