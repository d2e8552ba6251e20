"""Command-line interface: ``kmr {register,criterion,mean,bootstrap,simulate,gap}``.

Every subcommand prints a one-line JSON summary.  Exit codes: 0 success,
2 usage error, 3 registration did not converge (outputs are still
written), 4 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .alignment import compute_criterion
from .bootstrap import bootstrap_se
from .errors import KMRError
from .kernels import Bandwidths, KernelSpec, default_bandwidths
from .metrics import alignment_report
from .optimizer import FitConfig, FitResult, fit_direction
from .regression import nadaraya_watson_pooled
from .simulation import ScenarioSpec, run_study

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED, EXIT_DATA = 0, 2, 3, 4

_KERNELS = [k.value for k in KernelSpec]


def _auto_or_positive(kind):
    def parse(text):
        if text == "auto":
            return "auto"
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}")
        if value <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return value
    return parse


def _add_pair(p, warp_required=False, warp=True):
    p.add_argument("--target", required=True, help="CSV of the reference series (time,value)")
    p.add_argument("--source", required=True, help="CSV of the series to be warped")
    if warp:
        p.add_argument("--warp", required=warp_required, help="warp JSON")


def _add_smoothing(p):
    p.add_argument("--ht", type=_auto_or_positive(float), default="auto")
    p.add_argument("--hy", type=_auto_or_positive(float), default="auto")
    p.add_argument("--kernel-t", choices=["gaussian"], default="gaussian",
                   help="time kernel; must not vanish, so only gaussian is offered")
    p.add_argument("--kernel-y", choices=_KERNELS, default="gaussian")


def _add_fit(p):
    p.add_argument("--knots", type=_auto_or_positive(int), default="auto",
                   help="number of line segments of the warp, or 'auto'")
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="estimate the warp of --source onto --target")
    _add_pair(p, warp=False)
    _add_smoothing(p)
    _add_fit(p)
    p.add_argument("--direction", choices=["forward", "reverse", "best"], default="forward")
    p.add_argument("--out", required=True, help="where to write the warp JSON")
    p.add_argument("--aligned-out", help="CSV of the warped series")
    p.add_argument("--trace", help="CSV of the criterion after each sweep")
    p.add_argument("--gap-grid", type=int, default=1000)

    p = sub.add_parser("criterion", help="evaluate the alignment criterion for a warp")
    _add_pair(p, warp_required=True)
    _add_smoothing(p)

    p = sub.add_parser("mean", help="pooled Nadaraya-Watson mean after warping")
    _add_pair(p, warp_required=True)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--bandwidth", type=_auto_or_positive(float), default="auto")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bootstrap", help="bootstrap standard error of a fitted warp")
    _add_pair(p, warp_required=True)
    _add_smoothing(p)
    _add_fit(p)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo study of one scenario")
    p.add_argument("--scenario", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--noise-factor", type=float, default=0.05)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gap", help="average squared difference before/after warping")
    _add_pair(p)
    p.add_argument("--grid", type=int, default=1000)
    return parser


def _bandwidths(args, d1, d2) -> Bandwidths:
    auto = default_bandwidths(d1, d2) if "auto" in (args.ht, args.hy) else None
    h_t = auto.h_t if args.ht == "auto" else args.ht
    h_y = auto.h_y if args.hy == "auto" else args.hy
    return Bandwidths(h_t, h_y)


def _config(args) -> FitConfig:
    return FitConfig(n_segments=args.knots, restarts=args.restarts, seed=args.seed)


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_register(args) -> int:
    d1, d2 = io.load_csv(args.target), io.load_csv(args.source)
    bw = _bandwidths(args, d1, d2)
    fit, direction = fit_direction(d1, d2, args.direction, args.kernel_t, args.kernel_y, bw,
                                   _config(args), gap_grid=args.gap_grid)
    ref, moved = (d1, d2) if direction == "forward" else (d2, d1)
    io.save_warp(args.out, fit.warp)
    if args.aligned_out:
        io.write_rows(args.aligned_out, ("time", "value"), (fit.warp(moved.times), moved.values))
    if args.trace:
        trace = fit.criterion_trace
        io.write_rows(args.trace, ("sweep", "l_n"), (np.arange(trace.size), trace))
    report = alignment_report(ref, moved, fit.warp, args.gap_grid)
    _emit({
        "direction": direction,
        "converged": fit.converged,
        "sweeps": fit.sweeps_used,
        "n_segments": fit.warp.n_segments,
        "h_t": bw.h_t,
        "h_y": bw.h_y,
        **fit.criterion.as_dict(),
        "pre_gap": report.pre_gap,
        "post_gap": report.post_gap,
        "warp": args.out,
    })
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_criterion(args) -> int:
    d1, d2 = io.load_csv(args.target), io.load_csv(args.source)
    warp = io.load_warp(args.warp)
    value = compute_criterion(d1, d2, warp, args.kernel_t, args.kernel_y, _bandwidths(args, d1, d2))
    _emit(value.as_dict())
    return EXIT_OK


def cmd_mean(args) -> int:
    d1, d2 = io.load_csv(args.target), io.load_csv(args.source)
    warp = io.load_warp(args.warp)
    m = nadaraya_watson_pooled(d1, d2, warp, args.bandwidth)
    lo, hi = m.hull
    grid = np.linspace(lo, hi, args.grid)
    io.write_rows(args.out, ("t", "mean"), (grid, m(grid)))
    _emit({"bandwidth": m.bandwidth, "grid": args.grid, "out": args.out})
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    d1, d2 = io.load_csv(args.target), io.load_csv(args.source)
    warp = io.load_warp(args.warp)
    bw = _bandwidths(args, d1, d2)
    crit = compute_criterion(d1, d2, warp, args.kernel_t, args.kernel_y, bw)
    fit = FitResult(warp, crit, 0, np.array([crit.l_n]), True, bw, _config(args),
                    (KernelSpec(args.kernel_t), KernelSpec(args.kernel_y)))
    lo, hi = warp.domain
    grid = np.linspace(lo, hi, args.grid)
    fixed = "auto" if "auto" in (args.ht, args.hy) else bw
    res = bootstrap_se(d1, d2, fit, args.replicates, args.seed, grid, bandwidths=fixed)
    io.write_rows(args.out, ("t", "se", "flagged_fraction"),
                  (res.eval_grid, res.se_curve, res.flagged_fraction))
    _emit({"replicates": res.replicate_count, "failed_replicates": res.failed_replicates,
           "seed": res.master_seed, "max_se": float(res.se_curve.max()), "out": args.out})
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = ScenarioSpec(args.scenario, n1=args.n, n2=args.n, runs=args.runs,
                        master_seed=args.seed, noise_factor=args.noise_factor)
    metrics = run_study(spec, FitConfig(), eval_grid_size=args.grid)
    summary = io.save_study(args.out, metrics)
    _emit({"scenario": args.scenario, **summary, "out": args.out})
    return EXIT_OK


def cmd_gap(args) -> int:
    d1, d2 = io.load_csv(args.target), io.load_csv(args.source)
    warp = io.load_warp(args.warp) if args.warp else None
    if warp is None:
        from .metrics import mean_squared_gap, overlap_interval
        gap = mean_squared_gap(d1, d2, None, args.grid)
        _emit({"pre_gap": gap, "post_gap": gap, "grid_size": args.grid,
               "overlap_interval": list(overlap_interval(d1, d2))})
    else:
        _emit(alignment_report(d1, d2, warp, args.grid).as_dict())
    return EXIT_OK


_COMMANDS = {
    "register": cmd_register,
    "criterion": cmd_criterion,
    "mean": cmd_mean,
    "bootstrap": cmd_bootstrap,
    "simulate": cmd_simulate,
    "gap": cmd_gap,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (KMRError, ArithmeticError) as exc:
        print(f"kmr: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
