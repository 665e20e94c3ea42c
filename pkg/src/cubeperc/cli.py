"""
Command-line driver.

Exit codes: 0 success, 1 usage or input error, 2 invariant violation,
3 resource-cap violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import branching, constructions
from .boundary import best_direction, density_report, direction_bound_holds, sidon_sum
from .components import analyze, write_histogram_csv
from .errors import CubePercError, InvariantViolation, ResourceCapError
from .experiments import (
    ExperimentConfig,
    TrialRow,
    default_threshold,
    giant_sweep,
    run_indexed,
    sprinkle_experiment,
    u_concentration,
    write_rows_csv,
)
from .hypercube import CubeGeometry, OccupancySet, make_layout
from .sampling import PercolationParams, TrialSeed, parse_seed, sample_occupancy

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_RESOURCE = 0, 1, 2, 3


def int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def float_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def flag(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


@contextmanager
def _open_out(path):
    with open(path, "w", newline="") as fh:
        yield fh


def emit(args, payload, rows=None, csv_writer=None):
    if args.out_csv:
        with _open_out(args.out_csv) as fh:
            if csv_writer is not None:
                csv_writer(fh)
            else:
                write_rows_csv(fh, rows or [])
    text = dump_json(payload)
    if args.out_json:
        Path(args.out_json).write_text(text)
    else:
        sys.stdout.write(text)


def load_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    """Values from ``--config`` override command-line flags."""
    if not args.config:
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, value in load_config(args.config).items():
        if key in ("config", "command"):
            continue
        action = actions.get(key)
        if action is None:
            raise ValueError(f"unknown config key {key!r} for {args.command}")
        if isinstance(action, argparse._StoreTrueAction):
            setattr(args, key, flag(value))
        else:
            setattr(args, key, action.type(value) if action.type else value)
    return args


# subcommands

def cmd_simulate(args):
    params = PercolationParams(args.n, args.chi)
    geo = CubeGeometry(args.n)
    geo.check_dense()
    threshold = args.threshold if args.threshold is not None else default_threshold(args.n, args.k, args.chi)
    config = ExperimentConfig(n_grid=[args.n], chi_grid=[args.chi], k=args.k, trials=args.trials,
                              master_seed=args.seed, component_threshold=threshold, threads=args.threads,
                              record_runtime=args.record_runtime)
    if (1 + args.chi) / args.n > 0.5:
        raise ValueError("lambda above the 1/2 sanity gate")
    result = giant_sweep(config, experiment="simulate")
    if args.hist_csv:
        reports = run_indexed(
            lambda t: (t, analyze(geo, sample_occupancy(args.n, params.lam, TrialSeed(args.seed, t)), threshold)),
            args.trials, args.threads)
        with _open_out(args.hist_csv) as fh:
            write_histogram_csv(fh, reports)
    emit(args, {"experiment": "simulate", "seed": args.seed, "cells": [c.as_dict() for c in result.cells]},
         result.rows)
    return EXIT_OK


def cmd_giant_sweep(args):
    config = ExperimentConfig(n_grid=args.n_grid, chi_grid=args.chi_grid, k=args.k, trials=args.trials,
                              master_seed=args.seed, component_threshold=args.threshold, c_k=args.c_k,
                              threads=args.threads, record_runtime=args.record_runtime)
    result = giant_sweep(config)
    payload = {
        "experiment": "giant-sweep", "seed": args.seed,
        "cells": [c.as_dict() for c in result.cells],
        "errors": [vars(e) for e in result.errors],
    }
    emit(args, payload, result.rows)
    if any(e.kind == "resource-cap" for e in result.errors):
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_survival(args):
    pc = branching.pi_chi(args.n, args.chi, args.regime, args.tol)
    payload = {
        "n": args.n, "chi": args.chi, "regime": pc.regime,
        "finite_n": pc.finite_n, "asymptotic": pc.asymptotic,
        "alpha": branching.alpha_of_epsilon(args.chi),
        "solver_residual": pc.residual,
        "tree_survival": branching.tree_component_survival(args.n, (1 + args.chi) / args.n, args.tol),
    }
    emit(args, payload, [])
    return EXIT_OK


def cmd_gamma_stats(args):
    params = PercolationParams(args.n, args.chi)
    layout = make_layout(args.n, args.k)
    rows = []

    def record(t, g, growth):
        rows.append(TrialRow("gamma-stats", args.n, args.chi, args.k, t, args.seed, len(g.component),
                             lam=params.lam))

    rates = constructions.success_rate(params, layout, args.trials, args.seed, on_trial=record)
    pi_asym = branching.pi_chi(args.n, args.chi).asymptotic
    payload = {
        "success_rate": {"gamma": rates.gamma.estimate, "growth": rates.growth.estimate},
        "ci": {"gamma": list(rates.gamma.ci), "growth": list(rates.growth.ci)},
        "pi_asymptotic": pi_asym,
        "pi_k": constructions.pi_k(args.n, args.k, args.chi, args.rho_k),
        "phi_n": constructions.phi_n(args.n, args.k, args.chi),
        "trials": args.trials, "seed": args.seed,
        **layout.as_dict(),
    }
    emit(args, payload, rows)
    return EXIT_OK


BOUNDARY_COLUMNS = ("trial", "n", "seed", "size", "sidon_sum", "size_squared", "best_direction", "displaced",
                    "bound_ok")


def cmd_boundary_audit(args):
    geo = CubeGeometry(args.n)
    geo.check_dense()

    def trial(t):
        rng = np.random.default_rng(TrialSeed(args.seed, t).numpy_seed())
        A = OccupancySet(geo, rng.random(geo.size) < rng.uniform())
        s = sidon_sum(geo, A)
        if A.cardinality == 0:
            direction, displaced = 0, 0
        else:
            direction, displaced = best_direction(geo, A)
        ok = direction_bound_holds(displaced, A.cardinality, geo.n)
        return (t, args.n, args.seed, A.cardinality, s, A.cardinality ** 2, direction, displaced, int(ok))

    results = run_indexed(trial, args.trials, args.threads)
    sidon_failures = sum(r[4] != r[5] for r in results)
    bound_failures = sum(not r[8] for r in results)

    def writer(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUNDARY_COLUMNS)
        w.writerows(results)

    emit(args, {"experiment": "boundary-audit", "n": args.n, "trials": args.trials, "seed": args.seed,
                "sidon_failures": sidon_failures, "bound_failures": bound_failures},
         csv_writer=writer)
    if sidon_failures or bound_failures:
        raise InvariantViolation(f"{sidon_failures} Sidon and {bound_failures} direction-bound failures")
    return EXIT_OK


DENSITY_COLUMNS = ("trial", "n", "k", "chi", "delta", "seed", "gamma_size", "gamma_nk_size", "d_delta_size",
                   "cutoff", "threshold")


def cmd_density_audit(args):
    geo = CubeGeometry(args.n)
    geo.check_dense()
    lam = PercolationParams(args.n, args.chi).lam
    threshold = args.threshold if args.threshold is not None else default_threshold(args.n, args.k, args.chi)

    def trial(t):
        occ = sample_occupancy(args.n, lam, TrialSeed(args.seed, t))
        gnk = constructions.extract_gamma_nk(geo, occ, threshold)
        rep = density_report(geo, gnk, args.k, args.delta)
        return (t, args.n, args.k, args.chi, args.delta, args.seed, occ.cardinality, gnk.cardinality,
                rep.d_delta_size, rep.threshold, threshold)

    results = run_indexed(trial, args.trials, args.threads)

    def writer(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DENSITY_COLUMNS)
        for r in results:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])

    emit(args, {"experiment": "density-audit", "n": args.n, "k": args.k, "chi": args.chi, "delta": args.delta,
                "trials": args.trials, "seed": args.seed, "threshold": threshold,
                "mean_d_delta_fraction": float(np.mean([r[8] for r in results])) / geo.size},
         csv_writer=writer)
    return EXIT_OK


def cmd_sprinkle(args):
    s = sprinkle_experiment(args.n, args.chi, args.trials, args.seed, args.threads)
    emit(args, {"experiment": "sprinkle", "seed": args.seed, **s.as_dict()}, s.rows)
    return EXIT_OK


def cmd_u_concentration(args):
    u = u_concentration(args.n, args.chi, args.k, args.threshold, args.trials, args.seed, args.threads)
    emit(args, {"experiment": "u-concentration", "seed": args.seed, **u.as_dict()}, u.rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=parse_seed, default=0, help="64-bit master seed (decimal or 0x hex)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-csv", type=str, default=None)
    common.add_argument("--out-json", type=str, default=None)
    common.add_argument("--config", type=str, default=None, help="key = value file; overrides flags")
    common.add_argument("--record-runtime", action="store_true",
                        help="fill the runtime_ms column (breaks byte-identical reruns)")

    # global flags live on every subcommand; a top-level copy would be clobbered by subparser defaults
    parser = argparse.ArgumentParser(prog="cubeperc", description="Vertex percolation on the binary n-cube.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="sample Gamma_n and report components")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--hist-csv", type=str, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("giant-sweep", parents=[common], help="largest-component law over an (n, chi) grid")
    p.add_argument("--n-grid", type=int_list, default=[14, 16, 18, 20])
    p.add_argument("--chi-grid", type=float_list, default=[0.3])
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--c-k", type=float, default=1.0)
    p.set_defaults(func=cmd_giant_sweep)

    p = sub.add_parser("survival", parents=[common], help="branching-process survival numbers")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--regime", choices=("constant", "vanishing"), default="constant")
    p.add_argument("--tol", type=float, default=branching.DEFAULT_TOL)
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("gamma-stats", parents=[common], help="gamma-process and growth success rates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--rho-k", type=float, default=1.0)
    p.set_defaults(func=cmd_gamma_stats)

    p = sub.add_parser("boundary-audit", parents=[common], help="Sidon identity and direction bound sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_boundary_audit)

    p = sub.add_parser("density-audit", parents=[common], help="2-sphere density of Gamma_{n,k}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_density_audit)

    p = sub.add_parser("sprinkle", parents=[common], help="two-round sprinkling experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_sprinkle)

    p = sub.add_parser("u-concentration", parents=[common], help="concentration of the small-component mass")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_u_concentration)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; 2 is reserved for invariant failures here
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args = apply_config(parser, args)
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CubePercError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
