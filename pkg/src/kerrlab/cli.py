"""``kerrlab`` command-line front end.

Structured reports go out as JSON, tables as CSV.  Every flag can also come
from a JSON config file given with ``--config``; a flag typed on the command
line wins over the file.  Exit codes: 0 success, 1 numerical failure, 2 bad
arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import elliptic
from .classifier import classify
from .constants import MotionConstants
from .errors import KerrError, ParameterError, StepFailure
from .integrator import GeodesicState, integrate, null_tangent, state_from_constants
from .kerr import STAR, KerrParams, KerrStarPoint, TangentVector
from .potentials import radial_poly, radial_roots
from .selftest import format_report, run_selftest, worker_count
from .spherical import chebyshev_radii, delta_t_quadrature, spherical_orbit

TRAJECTORY_HEADER = ["s", "t*", "r", "theta", "phi_star", "dr_ds", "dtheta_ds",
                     "drift_E", "drift_L", "drift_q", "drift_K"]
SCAN_HEADER = ["r", "Phi", "Qcal", "u_minus", "u_plus", "theta2_deg", "B",
               "delta_t_elliptic", "delta_t_quadrature"]

DEFAULT_A, DEFAULT_M = 3.0, 8.0
SHARED_KEYS = {"a", "M", "tol", "quad_tol", "root_tol", "format", "output", "seed"}


@dataclass
class RunConfig:
    a: float = DEFAULT_A
    M: float = DEFAULT_M
    tolerances: dict = field(default_factory=lambda: {"ode_tol": 1e-10, "quad_tol": 1e-12,
                                                      "root_tol": None})
    output: dict = field(default_factory=lambda: {"format": None, "path": None})
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            a=args.a, M=args.M,
            tolerances={"ode_tol": getattr(args, "tol", 1e-10),
                        "quad_tol": getattr(args, "quad_tol", 1e-12),
                        "root_tol": getattr(args, "root_tol", None)},
            output={"format": getattr(args, "format", "json"),
                    "path": args.output},
            seed=getattr(args, "seed", 0),
        )

    def params(self) -> KerrParams:
        if not 0.0 < abs(self.a) < self.M:
            raise UsageError(f"need 0 < |a| < M, got a={self.a}, M={self.M}")
        return KerrParams(self.a, self.M)


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    # strict JSON has no infinities; write them as the strings "inf" / "-inf"
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _json_dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, path: Optional[str]):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _floats(text: str, n: Optional[int], what: str):
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what}: expected {n} numbers, got {len(vals)}")
    return vals


def _flatten_config(raw: dict) -> dict:
    """Map the nested RunConfig layout onto argparse destinations."""
    out = dict(raw)
    tol = out.pop("tolerances", {}) or {}
    for key, dest in (("ode_tol", "tol"), ("quad_tol", "quad_tol"), ("root_tol", "root_tol")):
        if key in tol:
            out[dest] = tol[key]
    outp = out.pop("output", {}) or {}
    if "format" in outp:
        out["format"] = outp["format"]
    if "path" in outp:
        out["output"] = outp["path"]
    return out


def _add_common(p):
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--a", type=float, default=DEFAULT_A, help="spin parameter, 0 < |a| < M")
    p.add_argument("--M", type=float, default=DEFAULT_M, help="mass")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrlab",
                                     description="Null geodesics of the Kerr-star spacetime.")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = {}

    p = sub.add_parser("potentials", help="real roots of R(r) as JSON")
    _add_common(p)
    p.add_argument("--E", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--Q", type=float)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--root-tol", dest="root_tol", type=float, default=None,
                   help="multiplicity tolerance on |R'|")
    leaves["potentials"] = p

    p = sub.add_parser("integrate", help="integrate a null geodesic, CSV + events JSON")
    _add_common(p)
    p.add_argument("--init", help="t*,r,theta,phi*")
    p.add_argument("--dir", help="tangent: 4 components, or 3 spatial ones (v^t* is solved for)")
    p.add_argument("--spherical-r", dest="spherical_r", type=float,
                   help="start on the Q<0 spherical orbit at this radius instead")
    p.add_argument("--smax", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--events", help="events JSON path (default: OUTPUT.events.json)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    leaves["integrate"] = p

    sp = sub.add_parser("spherical", help="Q<0 spherical orbits")
    ssub = sp.add_subparsers(dest="spherical_command", required=True)
    p = ssub.add_parser("scan", help="CSV over Chebyshev radii of the existence window")
    _add_common(p)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--quad-tol", dest="quad_tol", type=float, default=1e-12)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    leaves["spherical scan"] = p
    p = ssub.add_parser("at", help="one spherical orbit as JSON")
    _add_common(p)
    p.add_argument("--r", type=float)
    leaves["spherical at"] = p

    p = sub.add_parser("classify", help="case-tree verdict as JSON")
    _add_common(p)
    p.add_argument("--E", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--Q", type=float)
    p.add_argument("--r", type=float, help="radius of a spherical orbit with these constants")
    leaves["classify"] = p

    p = sub.add_parser("elliptic", help="evaluate one special function")
    _add_common(p)
    p.add_argument("--fn", choices=["K", "E", "D", "F", "Einc", "2f1"])
    p.add_argument("--args", help="comma-separated arguments, e.g. -3 or 0.5,0.5,1,-2")
    leaves["elliptic"] = p

    p = sub.add_parser("selftest", help="seeded invariant suite")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0)
    leaves["selftest"] = p

    parser.leaves = leaves
    return parser


def _leaf_key(argv):
    words = [w for w in argv if not w.startswith("-")]
    if not words:
        return None
    if words[0] == "spherical" and len(words) > 1:
        return f"spherical {words[1]}"
    return words[0]


def parse(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        key = _leaf_key(argv)
        leaf = parser.leaves.get(key)
        try:
            with open(known.config) as fh:
                cfg = _flatten_config(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        if leaf is not None:
            dests = {a.dest for a in leaf._actions}
            # shared RunConfig keys may be irrelevant to this subcommand; drop those quietly
            cfg = {k: v for k, v in cfg.items() if k in dests or k not in SHARED_KEYS}
            unknown = sorted(k for k in cfg if k not in dests)
            if unknown:
                parser.error(f"unknown config keys for {key}: {', '.join(unknown)}")
            leaf.set_defaults(**cfg)
    return parser, parser.parse_args(argv)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required value(s): " + ", ".join("--" + n for n in missing))


def _params(args) -> KerrParams:
    try:
        return RunConfig.from_args(args).params()
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- subcommands

def cmd_potentials(args):
    _require(args, "E", "L", "Q")
    params = _params(args)
    consts = MotionConstants.from_ELQ(params, args.E, args.L, args.Q, args.q)
    report = radial_roots(radial_poly(consts, params), args.root_tol).to_dict()
    report["coefficients"] = list(radial_poly(consts, params).coeffs)
    _emit(_json_dump(report), args.output)


def _initial_state(args, params):
    if args.spherical_r is not None:
        orbit = spherical_orbit(params, args.spherical_r, with_delta_t=False)
        consts = MotionConstants.from_ELQ(params, 1.0, orbit.Phi, orbit.Qcal)
        th1, th2 = orbit.theta_bounds[:2]
        point = KerrStarPoint(0.0, args.spherical_r, 0.5 * (th1 + th2), 0.0)
        return state_from_constants(params, consts, point, 1, 1)
    _require(args, "init", "dir")
    point = KerrStarPoint(*_floats(args.init, 4, "--init"))
    comps = _floats(args.dir, None, "--dir")
    if len(comps) == 4:
        return GeodesicState(point, TangentVector(tuple(comps), STAR), 0.0)
    if len(comps) == 3:
        v = null_tangent(params, point, *comps)
        if v is None:
            raise UsageError("--dir: no future-directed null tangent has these spatial components")
        return GeodesicState(point, v, 0.0)
    raise UsageError(f"--dir: expected 3 or 4 numbers, got {len(comps)}")


def cmd_integrate(args):
    params = _params(args)
    state = _initial_state(args, params)
    try:
        traj = integrate(params, state, args.smax, args.tol)
    except StepFailure as exc:
        if exc.trajectory is not None:
            _write_trajectory(args, exc.trajectory)
        raise
    _write_trajectory(args, traj)


def _table(header, rows, fmt):
    if fmt == "json":
        return _json_dump([dict(zip(header, map(float, row))) for row in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _write_trajectory(args, traj):
    rows = [[s, *c, v[1], v[2], *d]
            for s, c, v, d in zip(traj.s, traj.coords, traj.velocity, traj.drift_series)]
    _emit(_table(TRAJECTORY_HEADER, rows, args.format), args.output)
    events_path = args.events
    if events_path is None and args.output not in (None, "-"):
        events_path = args.output + ".events.json"
    if events_path is not None:
        report = {"status": traj.status, "drift": traj.drift,
                  "events": [e.to_dict() for e in traj.events]}
        _emit(_json_dump(report), events_path)


def _scan_row(job):
    params, r, tol = job
    orbit = spherical_orbit(params, r)
    return [r, orbit.Phi, orbit.Qcal, orbit.u_minus, orbit.u_plus,
            math.degrees(orbit.theta_bounds[1]), orbit.B, orbit.delta_t,
            delta_t_quadrature(params, orbit, tol)]


def cmd_spherical_scan(args):
    params = _params(args)
    if args.n < 1:
        raise UsageError("--n must be positive")
    jobs = [(params, float(r), args.quad_tol) for r in chebyshev_radii(params, args.n)]
    workers = worker_count()
    if workers == 1:
        rows = [_scan_row(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs))  # map keeps input order
    _emit(_table(SCAN_HEADER, rows, args.format), args.output)


def cmd_spherical_at(args):
    _require(args, "r")
    params = _params(args)
    orbit = spherical_orbit(params, args.r)
    out = orbit.to_dict()
    if orbit.delta_t is not None:
        out["delta_t_quadrature"] = delta_t_quadrature(params, orbit)
    _emit(_json_dump(out), args.output)


def cmd_classify(args):
    _require(args, "E", "L", "Q")
    params = _params(args)
    consts = MotionConstants.from_ELQ(params, args.E, args.L, args.Q)
    _emit(_json_dump(classify(params, consts, args.r).to_dict()), args.output)


_ELLIPTIC = {
    "K": (elliptic.comp_K, 1),
    "E": (elliptic.comp_E, 1),
    "D": (elliptic.comp_D, 1),
    "F": (elliptic.incomp_F, 2),
    "Einc": (elliptic.incomp_E, 2),
    "2f1": (elliptic.hyp2f1, 4),
}


def cmd_elliptic(args):
    _require(args, "fn", "args")
    fn, arity = _ELLIPTIC[args.fn]
    vals = _floats(args.args, arity, "--args")
    _emit(_fmt(fn(*vals)) + "\n", args.output)


def cmd_selftest(args):
    results = run_selftest(args.seed)
    _emit(format_report(results, args.seed), args.output)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "potentials": cmd_potentials,
    "integrate": cmd_integrate,
    "spherical scan": cmd_spherical_scan,
    "spherical at": cmd_spherical_at,
    "classify": cmd_classify,
    "elliptic": cmd_elliptic,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, args = parse(argv)
    except SystemExit as exc:  # argparse already printed its message
        return int(exc.code or 0)
    key = args.command if args.command != "spherical" else f"spherical {args.spherical_command}"
    try:
        code = COMMANDS[key](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kerrlab: error: {exc}", file=sys.stderr)
        return 2
    except (KerrError, ArithmeticError) as exc:
        print(f"kerrlab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kerrlab: error: {exc}", file=sys.stderr)
        return 1
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
