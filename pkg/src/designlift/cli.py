"""Command line entry point: ``designlift <command> ...``."""

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .designs import Sphere, certify, design_accuracy, frame_check, load_design, save_design, stabilizer_design
from .errors import CapacityError, ConvergenceError, FormatError, InvariantError, ParameterError
from .experiments import emit_quantiles, emit_report, fit_noise_slope, load_config, run_experiment
from .linalg import numerical_rank
from .measurement import (
    NOISE_SHAPES,
    load_ensemble,
    load_problem,
    sample_ensemble,
    save_ensemble,
    save_observations,
    simulate_measurements,
)
from .solver import SolverConfig, recover, recover_psd
from .theory import SUITES, THETA_GRID, format_check_csv, run_theory_suite


def _write_or_print(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_design_build(args):
    d = stabilizer_design(args.stabilizer)
    if args.out:
        save_design(args.out, d)
        print(f"wrote {d.size} stabilizer states (n={d.dim}) to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(io.format_design(d))
    return 0


def cmd_design_verify(args):
    d = load_design(args.file)
    method = "dense" if args.dense else "power" if args.power else "auto"
    theta = design_accuracy(d, args.t, args.norm, method=method, seed=args.seed)
    frame = frame_check(d)
    ok = theta <= args.tol
    print(f"theta_{args.norm}(t={args.t}) = {theta:.6e}  frame_deviation = {frame:.3e}  "
          f"{'PASS' if ok else 'FAIL'} (tol {args.tol:g})")
    return 0 if ok else 1


def cmd_design_certify(args):
    d = load_design(args.file)
    c = certify(d, args.t)
    print(f"t={c.t} theta_1={c.theta_1:.6e} theta_inf={c.theta_inf:.6e} "
          f"frame_deviation={c.frame_deviation:.3e} method={c.method}")
    return 0


def cmd_ensemble(args):
    if args.stabilizer is not None:
        source = stabilizer_design(args.stabilizer)
    elif args.sphere is not None:
        source = Sphere(args.sphere)
    else:
        source = load_design(args.design)
    e = sample_ensemble(source, args.m, args.seed)
    save_ensemble(args.out, e)
    return 0


def cmd_simulate(args):
    e = load_ensemble(args.ensemble)
    X = io.load_hmat(args.truth)
    q = io.parse_q(args.q)
    p = simulate_measurements(e, X, args.eta, q, args.noise_shape, args.seed)
    save_observations(args.out, p)
    return 0


def cmd_recover(args):
    problem = load_problem(args.ensemble, args.obs)
    cfg = SolverConfig(max_iterations=args.max_iter, primal_tolerance=args.tol, dual_tolerance=args.tol)
    res = (recover_psd if args.psd else recover)(problem, cfg)
    io.save_hmat(args.out, res.solution)
    print(f"converged={res.converged} iterations={res.iterations} objective={res.objective:.10g} "
          f"feasibility_residual={res.feasibility_residual:.3e} rank={numerical_rank(res.solution)}")
    return 0 if res.converged else 1


def cmd_verify_theory(args):
    d = load_design(args.design)
    thetas = tuple(args.theta) if args.theta else THETA_GRID
    report = run_theory_suite(
        d, args.suite, samples=args.samples, seed=args.seed, r=args.rank, rho=args.rho,
        thetas=thetas, m=args.m, trials=args.trials, tau=args.tau,
    )
    _write_or_print(format_check_csv(report), args.report)
    bad = report.violations
    print(f"{len(report.rows)} checks, {len(bad)} violations", file=sys.stderr)
    return 0 if not bad else 1


def cmd_experiment(args):
    cfg = load_config(args.config)
    env_seed = os.environ.get("DESIGNLIFT_SEED")
    if env_seed is not None:
        cfg = replace(cfg, seed=int(env_seed))
    results = run_experiment(cfg, threads=args.threads)
    emit_report(results, args.out, cfg)
    emit_quantiles(results, Path(args.out).with_suffix(".quantiles.csv"))
    if cfg.kind == "noise":
        for f in fit_noise_slope(results):
            print(f"{f.design} n={f.n} r={f.r} m={f.m} q={io.format_q(f.q)}: floor={f.floor:.3e} "
                  f"slope={f.slope:.4g} intercept={f.intercept:.3e} corr={f.correlation:.4f}", file=sys.stderr)
    stalled = [c for c in results if c.nonconverged >= 0.5 * c.trials]
    return 2 if stalled else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="designlift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    design = sub.add_parser("design", help="build or certify designs")
    dsub = design.add_subparsers(dest="design_command", required=True)
    b = dsub.add_parser("build", help="enumerate stabilizer states")
    b.add_argument("--stabilizer", type=int, required=True, metavar="K", help="qubit count (1-3)")
    b.add_argument("--out", help="output design file (default: stdout)")
    b.set_defaults(func=cmd_design_build)
    v = dsub.add_parser("verify", help="check the design accuracy against a tolerance")
    v.add_argument("--file", required=True)
    v.add_argument("--t", type=int, default=3)
    v.add_argument("--norm", choices=("one", "inf"), default="inf")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--dense", action="store_true")
    g.add_argument("--power", action="store_true")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_design_verify)
    c = dsub.add_parser("certify", help="print theta_1, theta_inf and frame deviation")
    c.add_argument("--file", required=True)
    c.add_argument("--t", type=int, default=3)
    c.set_defaults(func=cmd_design_certify)

    e = sub.add_parser("ensemble", help="sample a measurement ensemble")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--design")
    src.add_argument("--stabilizer", type=int)
    src.add_argument("--sphere", type=int, metavar="N")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_ensemble)

    s = sub.add_parser("simulate", help="simulate observations b = A(X) + noise")
    s.add_argument("--ensemble", required=True)
    s.add_argument("--truth", required=True, help="HMAT file with the ground truth")
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--q", default="2", help="1, 2 or inf")
    s.add_argument("--noise-shape", choices=NOISE_SHAPES, default="gaussian_rescaled")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("recover", help="solve the nuclear-norm program")
    r.add_argument("--ensemble", required=True)
    r.add_argument("--obs", required=True)
    r.add_argument("--psd", action="store_true")
    r.add_argument("--tol", type=float, default=1e-7)
    r.add_argument("--max-iter", type=int, default=5000)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recover)

    t = sub.add_parser("verify-theory", help="run moment / small-ball / width checks")
    t.add_argument("--design", required=True)
    t.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    t.add_argument("--samples", type=int, default=50)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--rank", type=int, default=1)
    t.add_argument("--rho", type=float, default=0.5)
    t.add_argument("--theta", type=float, action="append", help="repeatable; default 0, 0.1, ..., 0.9")
    t.add_argument("--m", type=int, default=200)
    t.add_argument("--trials", type=int, default=500)
    t.add_argument("--tau", type=float)
    t.add_argument("--report", help="CSV output (default: stdout)")
    t.set_defaults(func=cmd_verify_theory)

    x = sub.add_parser("experiment", help="run a config-driven recovery experiment")
    x.add_argument("--config", required=True)
    x.add_argument("--out", required=True)
    x.add_argument("--threads", type=int, default=1)
    x.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FormatError, InvariantError, CapacityError, ConvergenceError, OSError) as exc:
        print(f"designlift: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
