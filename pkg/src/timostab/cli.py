"""Command-line front end.

Every subcommand reads a ``key=value`` beam configuration (``--config``) and
writes CSV or JSON to ``--output`` (standard output by default). Exit status is
0 on success, 2 on invalid input and 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import eigen
from .beam_model import BeamParams, ConfigError, DampingProfile, DimensionError, Grid, SecondOrderState, parse_config
from .discrete import build_operator
from .modal_analysis import ModalProblem, quartic_coefficients, quartic_roots, unique_continuation_check
from .riemann_transform import ConstraintError, RiemannState, forward_transform, inverse_transform
from .semigroup_sim import Formulation, conjugacy_test, decay_report, simulate
from .spectral_tools import NumericalError, discrete_spectrum, essential_accumulation_diagnostic, growth_bound_estimate
from .transport_operator import NearSpectrumError, analytic_spectrum, resolvent_apply, resolvent_residual

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class UsageError(ValueError):
    pass


def _load(args) -> tuple[BeamParams, DampingProfile, object]:
    path = Path(args.config)
    lines = path.read_text(encoding="utf-8").splitlines()
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key = item.split("=", 1)[0].strip()
        lines = [ln for ln in lines if ln.split("#", 1)[0].split("=", 1)[0].strip() != key]
        lines.append(item)
    params, damping, opts = parse_config("\n".join(lines), base=path.parent)
    if getattr(args, "n", None) is not None:
        opts = type(opts)(n=args.n, dt=opts.dt, t_final=opts.t_final)
    return params, damping, opts


def _initial(spec: str, grid: Grid) -> SecondOrderState:
    """``mode:<k>`` or a whitespace table with columns ``u u2 v v2`` on the nodes."""
    if spec.startswith("mode:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad mode index in {spec!r}") from exc
        if k < 1:
            raise UsageError("mode index must be positive")
        return SecondOrderState.mode(grid, k)
    data = np.loadtxt(spec, ndmin=2)
    if data.shape != (grid.n + 1, 4):
        raise DimensionError(f"initial data must have shape ({grid.n + 1}, 4), got {data.shape}")
    return SecondOrderState(grid, *data.T)


def _write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(out, payload):
    json.dump(_json_safe(payload), out, sort_keys=True, indent=2, allow_nan=False)
    out.write("\n")


# -- subcommands -------------------------------------------------------------


def cmd_spectrum(args, out):
    params, damping, opts = _load(args)
    grid = Grid(opts.n, params.l)
    grid.require_simulation_size()
    rep = discrete_spectrum(build_operator(args.kind, grid, params, damping), method=args.method)
    _write_csv(out, ["re", "im", "kind"], ((float(z.real), float(z.imag), args.kind) for z in rep.eigenvalues))


def cmd_analytic_spectrum(args, out):
    params, damping, _ = _load(args)
    spec = analytic_spectrum(params, damping, args.kmax)
    rows = []
    for name, branch in (("1", spec.branch1), ("2", spec.branch2)):
        rows += [(name, int(k), float(z.real), float(z.imag)) for k, z in zip(spec.k, branch)]
    _write_csv(out, ["branch", "k", "re", "im"], rows)


def _run(args):
    params, damping, opts = _load(args)
    grid = Grid(opts.n, params.l)
    Y0 = _initial(args.init, grid)
    t_final = args.t_final if args.t_final is not None else opts.t_final
    dt = args.dt if args.dt is not None else opts.dt
    return params, simulate(Y0, params, damping, t_final, dt, args.formulation)


def cmd_simulate(args, out):
    params, run = _run(args)
    _write_csv(out, ["t", "E"], zip(run.times.tolist(), run.energy.tolist()))
    if args.snapshot_output:
        x = run.grid.nodes
        with open(args.snapshot_output, "w", encoding="utf-8", newline="") as fh:
            rows = []
            for t, state in zip(run.snapshot_times, run.trajectory):
                if isinstance(state, RiemannState):
                    state = inverse_transform(state, params, tol=1e-8)
                rows += [
                    (float(t), float(x[j]), float(state.u[j]), float(state.u2[j]), float(state.v[j]), float(state.v2[j]))
                    for j in range(x.size)
                ]
            _write_csv(fh, ["t", "x", "u", "u2", "v", "v2"], rows)


def cmd_decay(args, out):
    _, run = _run(args)
    _write_json(out, decay_report(run).as_dict())


def cmd_roundtrip(args, out):
    params, _, opts = _load(args)
    grid = Grid(opts.n, params.l)
    rng = np.random.default_rng(args.seed)
    err_if, err_fi = 0.0, 0.0
    for _ in range(args.samples):
        u, v = rng.standard_normal((2, grid.n + 1))
        u[[0, -1]] = 0.0
        v[[0, -1]] = 0.0
        Y = SecondOrderState(grid, u, rng.standard_normal(grid.n + 1), v, rng.standard_normal(grid.n + 1))
        W = forward_transform(Y, params)
        Y2 = inverse_transform(W, params)
        W2 = forward_transform(Y2, params)
        scale = max(np.abs(Y.stack()).max(), 1.0)
        err_if = max(err_if, float(np.abs(Y2.stack() - Y.stack()).max() / scale))
        err_fi = max(err_fi, (W2 - W).norm() / max(W.norm(), 1.0))
    _write_json(out, {"samples": args.samples, "inverse_forward_error": err_if, "forward_inverse_error": err_fi})


def cmd_uc_check(args, out):
    params, damping, opts = _load(args)
    q = quartic_roots(*quartic_coefficients(ModalProblem(params, damping, args.omega)))
    b0, b1 = args.interval
    if not (0 <= b0 < b1 <= params.l):
        raise UsageError(f"interval must satisfy 0 <= b0 < b1 <= l, got ({b0}, {b1})")
    verdict = unique_continuation_check(q, b0, b1, m=args.m, h_sample=params.l / opts.n)
    _write_json(
        out,
        {
            "rank_ok": verdict.rank_ok,
            "sigma_ratio": verdict.smallest_singular_ratio,
            "regime": q.regime.value,
            "Xminus": q.Xminus,
            "Xplus": q.Xplus,
        },
    )


def cmd_resolvent_check(args, out):
    params, damping, opts = _load(args)
    lam = complex(args.lam.replace(" ", ""))
    try:
        data = [float(s) for s in args.data.split(",")]
    except ValueError as exc:
        raise UsageError(f"--data expects four comma-separated numbers, got {args.data!r}") from exc
    if len(data) != 4:
        raise UsageError("--data expects four comma-separated numbers")
    grid = Grid(opts.n, params.l)
    Z = RiemannState(grid, *(np.full(grid.n + 1, c) for c in data))
    U = resolvent_apply(lam, Z, params, damping)
    res = resolvent_residual(lam, U, Z, params, damping)
    _write_json(
        out,
        {"lambda": [lam.real, lam.imag], "n": grid.n, "h": grid.h, "residual": res, "residual_over_h": res / grid.h},
    )


def cmd_growth_bound(args, out):
    params, damping, opts = _load(args)
    grid = Grid(opts.n, params.l)
    grid.require_simulation_size()
    op = build_operator(args.kind, grid, params, damping)
    est = growth_bound_estimate(op)
    rep = discrete_spectrum(op, n_check=0)
    _write_json(out, {"estimate": est, "max_real_part": rep.max_real_part})


def cmd_accumulation(args, out):
    params, damping, _ = _load(args)
    rows = essential_accumulation_diagnostic(params, damping, args.n_list)
    _write_csv(out, ["n", "line", "max_distance"], ((r["n"], r["line"], r["max_distance"]) for r in rows))


def cmd_conjugacy(args, out):
    params, damping, opts = _load(args)
    grid = Grid(opts.n, params.l)
    grid.require_simulation_size()
    Y0 = _initial(args.init, grid)
    t_final = args.t_final if args.t_final is not None else opts.t_final
    _write_json(out, {"n": grid.n, "t_final": t_final, "discrepancy": conjugacy_test(Y0, params, damping, t_final)})


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timostab", description="Damped Timoshenko beam analysis tools.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text, n=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", required=True, help="beam configuration file (key=value lines)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a configuration entry; repeatable")
        p.add_argument("--output", "-o", help="output file (default: standard output)")
        if n:
            p.add_argument("--n", type=int, help="number of grid cells (overrides the config)")
        p.set_defaults(func=func)
        return p

    p = add("spectrum", cmd_spectrum, "eigenvalues of a discrete generator as CSV re,im,kind")
    p.add_argument("--kind", choices=["L", "L1", "S1C", "S1C0"], default="L", help="which generator")
    p.add_argument("--method", choices=["qr", "lapack"], default="qr", help="eigensolver")

    p = add("analytic-spectrum", cmd_analytic_spectrum, "closed-form transport spectrum as CSV branch,k,re,im", n=False)
    p.add_argument("--kmax", type=int, default=10, help="largest |k| per branch")

    for name, func, text in (
        ("simulate", cmd_simulate, "time integration; CSV t,E"),
        ("decay", cmd_decay, "energy decay summary as JSON {E0, ET, t_half, monotone}"),
    ):
        p = add(name, func, text)
        p.add_argument("--formulation", choices=[f.value for f in Formulation], default=Formulation.SECOND_ORDER.value)
        p.add_argument("--init", default="mode:1", help="mode:<k> or a table file with columns u u2 v v2")
        p.add_argument("--t-final", type=float, help="final time (overrides the config)")
        p.add_argument("--dt", type=float, help="time step (overrides the config)")
        if name == "simulate":
            p.add_argument("--snapshot-output", help="also write stored states as CSV t,x,u,u2,v,v2")

    p = add("roundtrip", cmd_roundtrip, "Riemann transform round-trip errors on random states as JSON")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    p = add("uc-check", cmd_uc_check, "unique-continuation verdict as JSON")
    p.add_argument("--omega", type=float, required=True, help="candidate frequency (nonzero)")
    p.add_argument("--interval", type=float, nargs=2, required=True, metavar=("B0", "B1"), help="positions in [0, l]")
    p.add_argument("--m", type=int, default=32, help="collocation points")

    p = add("resolvent-check", cmd_resolvent_check, "resolvent residual against the discrete operator as JSON")
    p.add_argument("--lambda", dest="lam", default="1", help="complex point, e.g. 1 or 0.5+2j")
    p.add_argument("--data", default="1,0,0,0", help="constant right-hand side p,phi,q,psi")

    p = add("growth-bound", cmd_growth_bound, "growth bound estimate as JSON {estimate, max_real_part}")
    p.add_argument("--kind", choices=["L", "L1", "S1C", "S1C0"], default="L")

    p = add("accumulation", cmd_accumulation, "eigenvalue distance to the predicted lines as CSV n,line,max_distance", n=False)
    p.add_argument("--n-list", type=int, nargs="+", default=[100, 200, 400])

    p = add("conjugacy", cmd_conjugacy, "second-order versus transport trajectory discrepancy as JSON")
    p.add_argument("--init", default="mode:1")
    p.add_argument("--t-final", type=float)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except (ConfigError, DimensionError, ConstraintError, UsageError, OSError, ValueError, TypeError) as exc:
        if isinstance(exc, NearSpectrumError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, eigen.ConvergenceError, OverflowError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
