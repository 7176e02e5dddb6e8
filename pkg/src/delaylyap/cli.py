"""Command-line front end.

Subcommands: ``h2`` (norm computation), ``lyap`` (P(t) traces to CSV +
figure), ``roots`` (characteristic-root estimates and the stability
certificate), ``convergence`` (error sweeps reproducing the reference
figures, CSV + figure).

Exit codes: 0 success, 2 parse/validation errors, 3 no stability
certificate, 4 iteration budget exhausted.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import benchmarks
from .discretization import build_discretization, reference_P_grid, reference_lyapunov
from .errors import (
    BudgetExhausted,
    DelayLyapError,
    ManifestError,
    NotHurwitz,
    ProjectedUnstable,
    SingularR0,
)
from .lyap import (
    SolveOptions,
    approx_from_state,
    characteristic_roots,
    eval_P_grid,
    h2_norm,
    low_rank_delay_lyapunov,
)
from .manifest import load_manifest
from .model import validate
from .oracles import delay_lyapunov_quadrature, integrate_fundamental
from .arnoldi import arnoldi_run
from .pencil import PencilContext

EXIT_PARSE = 2
EXIT_UNSTABLE = 3
EXIT_BUDGET = 4

# Fixed-step oracle settings for the convergence command (mode N).
ORACLE_SETTINGS = {"didactic": (5e-4, 120.0), "didactic2": (2.5e-3, 250.0)}


def _fmt(x):
    return format(float(x), ".17g")


def _load_system(args):
    if getattr(args, "example", None):
        try:
            return benchmarks.get_example(args.example, n=args.n)
        except KeyError as exc:
            raise ManifestError(str(exc))
    if getattr(args, "manifest", None):
        system = load_manifest(args.manifest)
        report = validate(system)
        if not report.ok:
            raise ManifestError(
                f"{args.manifest}: invalid system: " + "; ".join(report.issues)
            )
        return system
    raise ManifestError("provide a manifest path or --example NAME")


def _solve_options(args):
    if args.k is not None:
        return SolveOptions(k=args.k)
    return SolveOptions(k=None, residual_tol=args.tol, max_k=args.max_k)


def _system_lines(system):
    delays = ", ".join(_fmt(t) for t in system.taus)
    return [
        f"system: n={system.n} m={system.m} r={system.r} s={system.s}",
        f"delays: {delays}",
    ]


def _write_csv(path, header, rows, footer_lines=()):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        for line in footer_lines:
            fh.write(line + "\n")


def cmd_h2(args):
    system = _load_system(args)
    t0 = time.perf_counter()
    approx = low_rank_delay_lyapunov(system, _solve_options(args))
    t1 = time.perf_counter()
    value = h2_norm(approx)
    eval_ms = 1e3 * (time.perf_counter() - t1)
    timings = {
        "factorization": round(approx.timings.get("factorization_ms", 0.0), 3),
        "arnoldi": round(approx.timings.get("arnoldi_ms", 0.0), 3),
        "lyapunov": round(approx.timings.get("lyapunov_ms", 0.0), 3),
        "evaluation": round(eval_ms, 3),
    }
    for line in _system_lines(system):
        print(line)
    print(f"k: {approx.k}")
    print(f"residual: {_fmt(approx.residual_norm)}")
    print(f"h2: {_fmt(value)}")
    print(f"total-ms: {1e3 * (time.perf_counter() - t0):.3f}")
    summary = {
        "h2": value,
        "k": approx.k,
        "residual": approx.residual_norm,
        "stable": approx.stable,
        "timings": timings,
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_lyap(args):
    system = _load_system(args)
    samples = max(1, args.samples)
    ts = np.linspace(0.0, args.t_max, samples)
    opts = _solve_options(args)
    opts.t_grid = ts
    approx = low_rank_delay_lyapunov(system, opts)
    values = eval_P_grid(approx, opts.t_grid)
    n = system.n
    header = ["t"] + [f"P_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
    rows = [[t] + list(P.ravel()) for t, P in zip(ts, values)]
    out = Path(args.out)
    _write_csv(out, header, rows)
    print(f"wrote {out} ({samples} samples, k={approx.k})")
    fig_path = out.with_suffix(".png")
    from .plotting import save_lyap_figure

    flat = values.reshape(len(ts), -1)
    show = min(flat.shape[1], 6)
    save_lyap_figure(
        ts,
        [flat[:, j] for j in range(show)],
        [header[1 + j] for j in range(show)],
        fig_path,
    )
    print(f"wrote {fig_path}")
    return 0


def cmd_roots(args):
    system = _load_system(args)
    ctx = PencilContext(system)
    state = arnoldi_run(ctx, args.k)
    est = characteristic_roots(state, count=args.count)
    for line in _system_lines(system):
        print(line)
    for root in est.roots:
        print(f"root: {_fmt(root.real)} {'+' if root.imag >= 0 else '-'} {_fmt(abs(root.imag))}j")
    print(f"certificate: {'stable' if est.stable else 'unstable'}")
    return 0 if est.stable else EXIT_UNSTABLE


def _fit_slope(params, errors):
    mask = np.asarray(errors) > 0
    if mask.sum() < 2:
        return float("nan")
    return float(
        np.polyfit(np.log(np.asarray(params, float)[mask]), np.log(np.asarray(errors)[mask]), 1)[0]
    )


def _convergence_mode_n(args, system):
    if args.example not in ORACLE_SETTINGS:
        raise ManifestError(
            f"mode N needs a quadrature oracle; available for: {', '.join(ORACLE_SETTINGS)}"
        )
    h, horizon = ORACLE_SETTINGS[args.example]
    t_max = args.t_max if args.t_max is not None else 2.0
    samples = args.samples
    spacing = t_max / (samples - 1) if samples > 1 else 0.0
    if spacing:
        # Align the evaluation grid with the oracle step.
        per = max(1, round(spacing / h))
        h = spacing / per
    ks = integrate_fundamental(system, h, horizon)
    B = system.B
    ts = np.linspace(0.0, t_max, samples)
    P_ref = np.stack([delay_lyapunov_quadrature(ks, B, t) for t in ts])
    ref_max = np.max(np.abs(P_ref))
    err_p, err_h2 = [], []
    for N in args.grid:
        ref = build_discretization(system, N)
        P_N = reference_lyapunov(ref)
        vals = reference_P_grid(ref, P_N, ts)
        err_p.append(np.max(np.abs(vals - P_ref)) / ref_max)
        err_h2.append(np.max(np.abs(vals[0] - P_ref[0])) / np.max(np.abs(P_ref[0])))
    return ts, err_p, err_h2


def _convergence_mode_k(args, system):
    t_max = args.t_max if args.t_max is not None else 50.0
    k_ref = max(int(round(1.5 * max(args.grid))), max(args.grid) + 5)
    ctx = PencilContext(system)
    state = arnoldi_run(ctx, 2 * k_ref)
    reference = approx_from_state(state, k_ref)
    ts = np.linspace(0.0, t_max, args.samples)
    P_ref = eval_P_grid(reference, ts)
    ref_max = np.max(np.abs(P_ref))
    h2_ref = h2_norm(reference)
    err_p, err_h2 = [], []
    for k in args.grid:
        approx = approx_from_state(state, k)
        vals = eval_P_grid(approx, ts)
        err_p.append(np.max(np.abs(vals - P_ref)) / ref_max)
        err_h2.append(abs(h2_norm(approx) - h2_ref) / h2_ref)
    return ts, err_p, err_h2


def cmd_convergence(args):
    try:
        system = benchmarks.get_example(args.example, n=args.n)
    except KeyError as exc:
        raise ManifestError(str(exc))
    if args.mode == "N":
        _, err_p, err_h2 = _convergence_mode_n(args, system)
        xlabel = "N"
    else:
        _, err_p, err_h2 = _convergence_mode_k(args, system)
        xlabel = "k"
    slope_p = _fit_slope(args.grid, err_p)
    slope_h2 = _fit_slope(args.grid, err_h2)
    footer = [f"# slope: P={slope_p:.6g} h2={slope_h2:.6g}"]
    rows = [[p, ep, eh] for p, ep, eh in zip(args.grid, err_p, err_h2)]
    out = Path(args.out)
    _write_csv(out, [xlabel, "err_P", "err_h2"], rows, footer)
    print(f"wrote {out}")
    print(footer[0].lstrip("# "))
    fig_path = out.with_suffix(".png")
    from .plotting import save_convergence_figure

    save_convergence_figure(args.grid, err_p, err_h2, (slope_p, slope_h2), xlabel, fig_path)
    print(f"wrote {fig_path}")
    return 0


def _grid_type(text):
    try:
        grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be a comma-separated list of integers")
    if not grid:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return grid


def _add_system_args(p):
    p.add_argument("manifest", nargs="?", help="path to a system manifest (JSON)")
    p.add_argument("--example", help="built-in example name", default=None)
    p.add_argument("--n", type=int, default=200, help="size for the pde examples")


def _add_solver_args(p):
    p.add_argument("--k", type=int, default=None, help="fixed projection size")
    p.add_argument("--tol", type=float, default=1e-8, help="relative residual tolerance")
    p.add_argument("--max-k", type=int, default=200, dest="max_k", help="iteration cap")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="delaylyap",
        description="Delay Lyapunov matrices and H2 norms for time-delay systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("h2", help="compute the H2 norm")
    _add_system_args(p)
    _add_solver_args(p)
    p.set_defaults(func=cmd_h2)

    p = sub.add_parser("lyap", help="evaluate P(t) on a time grid, write CSV + figure")
    _add_system_args(p)
    _add_solver_args(p)
    p.add_argument("--t-max", type=float, default=2.0, dest="t_max")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_lyap)

    p = sub.add_parser("roots", help="characteristic-root estimates + certificate")
    _add_system_args(p)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("convergence", help="error sweep (mode N: dense, mode k: Krylov)")
    p.add_argument("--example", required=True)
    p.add_argument("--mode", choices=("N", "k"), default="k")
    p.add_argument("--grid", type=_grid_type, default=[10, 20, 30, 40, 50, 60, 70, 80, 90, 100])
    p.add_argument("--t-max", type=float, default=None, dest="t_max")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ProjectedUnstable, NotHurwitz, SingularR0) as exc:
        # all three certify (or strongly indicate) a non-stable system
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DelayLyapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
