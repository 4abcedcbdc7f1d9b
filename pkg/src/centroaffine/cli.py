"""Command-line entry point.

Every subcommand writes deterministic output: JSON with sorted keys, floats
in shortest round-trip form, no timestamps.  Failures print an error object
to stderr and exit with a code from ``ERROR_CODES``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as cio
from .diffop import symbolic_L
from .diffpoly import NotExact
from .duality import DualRepMismatch
from .hierarchy import FlowSpec, InconsistentRecursion, flow_lax_pair, flow_operator, omega
from .psido import DepthError
from .spectral import ModulusMismatch, TruncationError

# code name -> exit status
ERROR_CODES = {
    "usage": 2,
    "invalid_input": 3,
    "io_error": 4,
    "not_exact": 5,
    "truncation_underflow": 6,
    "depth_insufficient": 7,
    "inconsistent_recursion": 8,
    "modulus_mismatch": 9,
    "dual_rep_mismatch": 10,
    "singular_frame": 11,
    "integration_failure": 12,
    "blow_up": 13,
    "check_failed": 14,
}


class CLIError(Exception):
    def __init__(self, code: str, message: str, **details):
        super().__init__(message)
        self.code = code
        self.details = details


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError("usage", message)


def _classify(exc: BaseException) -> tuple:
    from .numerics import BlowUp, IntegrationError, SingularFrame

    details = {}
    if isinstance(exc, CLIError):
        return exc.code, exc.details
    if isinstance(exc, NotExact):
        code = "not_exact"
    elif isinstance(exc, TruncationError):
        code = "truncation_underflow"
    elif isinstance(exc, DepthError):
        code = "depth_insufficient"
    elif isinstance(exc, InconsistentRecursion):
        code = "inconsistent_recursion"
    elif isinstance(exc, ModulusMismatch):
        code = "modulus_mismatch"
    elif isinstance(exc, DualRepMismatch):
        code = "dual_rep_mismatch"
    elif isinstance(exc, SingularFrame):
        code = "singular_frame"
        details = {"index": exc.index, "ratio": exc.ratio}
    elif isinstance(exc, BlowUp):
        code = "blow_up"
        details = {"step": exc.step}
    elif isinstance(exc, IntegrationError):
        code = "integration_failure"
    elif isinstance(exc, OSError):
        code = "io_error"
    elif isinstance(exc, ValueError):
        code = "invalid_input"
    else:
        raise exc
    return code, details


def _emit(obj, out) -> None:
    out.write(cio.dumps(obj))


def _add_basis(p, default_traceless: bool) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--traceless", dest="traceless", action="store_true",
                   help="set u_(n-1) = 0" + (" (default)" if default_traceless else ""))
    g.add_argument("--general", dest="traceless", action="store_false",
                   help="keep every u_k symbolic" + ("" if default_traceless else " (default)"))
    p.set_defaults(traceless=default_traceless)


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centroaffine", description="Centro-affine curve flows: symbolic and numeric tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("omega", help="print the eigenring generator coefficients Omega_0..Omega_T")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True, help="truncation T")
    _add_basis(p, default_traceless=True)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("flow", help="print the n-KdV flow u_t = h for flow index j")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    _add_basis(p, default_traceless=False)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("curvature", help="curvature field of a sampled star-shaped curve (CSV x,g0,...)")
    p.add_argument("--input", required=True)
    p.add_argument("--open", action="store_true", help="treat samples as an open interval, not one period")
    p.add_argument("--output", help="write the field CSV here instead of stdout")

    p = sub.add_parser("evolve", help="integrate a hierarchy flow and report isospectral drift")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--u0", required=True, help="initial field CSV (x,u0,...)")
    p.add_argument("--dt", type=_positive(float), default=1e-4, help="time step (default 1e-4)")
    p.add_argument("--steps", type=int, default=10000, help="number of steps (default 10000)")
    p.add_argument("--save-every", type=_positive(int), default=100, help="snapshot stride (default 100)")
    p.add_argument("--lambda", dest="lams", type=float, nargs="+", default=[0.3, 1.0, 2.5],
                   help="spectral samples for the drift report (default 0.3 1.0 2.5)")
    p.add_argument("--method", choices=("ifrk4", "rk4"), default="ifrk4",
                   help="integrating-factor RK4 (default) or classical RK4")
    p.add_argument("--blowup", type=_positive(float), default=1e8, help="abort when |u| exceeds this (default 1e8)")
    _add_basis(p, default_traceless=False)
    p.add_argument("--output", help="directory for trajectory.csv and manifest.json")

    p = sub.add_parser("check", help="run a self-check suite")
    p.add_argument("--suite", required=True, choices=("ops", "duality", "omega", "adler", "commute", "numeric"))
    p.add_argument("--n", type=int)
    p.add_argument("--order", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--traceless", action="store_true", default=None)
    return parser


def _basis(n: int, traceless: bool):
    if n < 2:
        raise CLIError("invalid_input", "need n >= 2")
    return symbolic_L(n, traceless)


def cmd_omega(args, out, err=None) -> int:
    if args.order < 0:
        raise CLIError("invalid_input", "order must be non-negative")
    om = omega(args.n, args.order, _basis(args.n, args.traceless))
    if args.format == "text":
        for k, c in enumerate(om.coeffs):
            out.write(f"Omega_{k} = {c.to_text()}\n")
        return 0
    doc = om.to_json()
    doc["traceless"] = args.traceless
    _emit(doc, out)
    return 0


def cmd_flow(args, out, err=None) -> int:
    spec = FlowSpec(args.n, args.j)
    L = _basis(args.n, args.traceless)
    rhs, _ = flow_lax_pair(spec, L)
    P = flow_operator(spec, L)
    if args.format == "text":
        for k, h in enumerate(rhs):
            out.write(f"u{k}_t = {h.to_text()}\n")
        return 0
    _emit({
        "n": spec.n,
        "j": spec.j,
        "traceless": args.traceless,
        "operator": {str(e): P.terms[e].to_text() for e in sorted(P.terms, reverse=True)},
        "rhs": [h.to_text() for h in rhs],
    }, out)
    return 0


def cmd_curvature(args, out, err=None) -> int:
    from .numerics import curvature_from_curve

    curve = cio.read_curve(args.input, periodic=not args.open)
    field = curvature_from_curve(curve)
    text = cio.field_csv(field)
    if args.output:
        Path(args.output).write_text(text)
        _emit({"output": args.output, "n": field.n, "grid": field.grid.to_json()}, out)
    else:
        out.write(text)
    return 0


def cmd_evolve(args, out, err=None) -> int:
    import numpy as np

    from .numerics import evolve, isospectral_drift, zero_curvature_residual

    if args.steps < 0:
        raise CLIError("invalid_input", "steps must be non-negative")
    u0 = cio.read_field(args.u0, periodic=True)
    if u0.n != args.n:
        raise CLIError("invalid_input", f"field has {u0.n} components but n = {args.n}")
    spec = FlowSpec(args.n, args.j)
    rhs, X = flow_lax_pair(spec, _basis(args.n, args.traceless))
    if args.traceless and np.any(u0.u[-1] != 0):
        raise CLIError("invalid_input", "--traceless needs u_(n-1) = 0 in the initial field")
    traj = evolve(u0, rhs, args.dt, args.steps, save_every=args.save_every,
                  method=args.method, blowup=args.blowup, label={"n": spec.n, "j": spec.j})
    drift = isospectral_drift(traj, args.lams)
    masses = traj.masses()
    report = {
        "n": spec.n,
        "j": spec.j,
        "t_final": float(traj.times[-1]),
        "snapshots": len(traj),
        "rhs": [h.to_text() for h in rhs],
        "isospectral_drift": {
            "max": drift["max"],
            "per_lambda": {cio.fmt(k): v for k, v in drift["per_lambda"].items()},
        },
        "mass_drift": float(np.max(np.abs(masses - masses[0]))),
    }
    if len(traj) >= 5:
        report["zero_curvature_residual"] = zero_curvature_residual(traj, X)[1]
    man = cio.manifest(
        n=spec.n, j=spec.j, traceless=args.traceless, grid=u0.grid.to_json(), dt=args.dt,
        steps=args.steps, save_every=args.save_every, method=args.method,
        lambdas=list(args.lams), tolerances={"blowup": args.blowup}, u0=str(args.u0),
    )
    if args.output:
        d = Path(args.output)
        d.mkdir(parents=True, exist_ok=True)
        (d / "trajectory.csv").write_text(cio.trajectory_csv(traj))
        (d / "manifest.json").write_text(cio.dumps(man))
        (d / "report.json").write_text(cio.dumps(report))
    _emit({"manifest": man, "report": report}, out)
    return 0


def cmd_check(args, out, err=None) -> int:
    err = err or sys.stderr
    from .checks import run_suite

    result = run_suite(args.suite, n=args.n, order=args.order, samples=args.samples,
                       seed=args.seed, traceless=args.traceless)
    _emit(result, out)
    for c in result["checks"]:
        err.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  residual={c['residual']}\n")
    if not result["passed"]:
        raise CLIError("check_failed", f"suite {args.suite} failed",
                       failed=[c["name"] for c in result["checks"] if not c["passed"]])
    return 0


COMMANDS = {
    "omega": cmd_omega,
    "flow": cmd_flow,
    "curvature": cmd_curvature,
    "evolve": cmd_evolve,
    "check": cmd_check,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out, err)
    except SystemExit:
        raise
    except BaseException as exc:  # noqa: BLE001 - mapped to error codes below
        if isinstance(exc, KeyboardInterrupt):
            raise
        code, details = _classify(exc)
        err.write(json.dumps({"error": code, "message": str(exc), "details": details}, sort_keys=True) + "\n")
        return ERROR_CODES[code]


if __name__ == "__main__":
    sys.exit(main())
