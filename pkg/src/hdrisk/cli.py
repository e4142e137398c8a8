"""Command-line interface: fit, estimate, experiment, selftest.

Thin layer over the core package; the FastAPI service exposes the same
operations for long-running use.  Exit codes: 0 success, 1 validation
error, 2 runtime failure.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np
from pydantic import ValidationError

from .datagen import Dataset
from .errors import DimensionMismatch, HdriskError
from .estimators import SigmaOps, hat_r, square_loss_estimates, sure
from .harness import ExperimentConfig, paper_scale_config, resolve_threads, run_experiment
from .io import read_dataset_csv, read_matrix_csv
from .jacobians import closed_form_factors, mc_factors
from .losses import LossSpec
from .penalties import ElasticNetPenalty, L1Penalty, NoPenalty, NuclearPenalty
from .rng import stream
from .selftest import run_selftest
from .solvers import FitResult, SolverConfig, fit

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _add_model_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data", required=True, help="dataset CSV (y first column)")
    sub.add_argument("--loss", default="square",
                     choices=["square", "huber", "smooth_huber0", "smooth_huber1"])
    sub.add_argument("--scale", type=float, default=1.0, help="loss scale (elbow location)")
    sub.add_argument("--penalty", default="l1",
                     choices=["none", "l1", "elastic_net", "nuclear"])
    sub.add_argument("--lam", type=float, default=0.0, help="l1 / nuclear strength")
    sub.add_argument("--mu", type=float, default=0.0, help="elastic-net ridge strength")
    sub.add_argument("--rows", type=int, help="nuclear penalty matrix rows")
    sub.add_argument("--cols", type=int, help="nuclear penalty matrix cols")
    sub.add_argument("--kkt-tol", type=float, default=1e-8)
    sub.add_argument("--max-iters", type=int, default=50_000)
    sub.add_argument("--out", help="write the JSON report here instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdrisk",
        description="Penalized M-estimators with out-of-sample error estimates",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("fit", help="fit an estimator, print a summary")
    _add_model_args(sub)

    sub = subs.add_parser("estimate", help="fit and report risk estimates")
    _add_model_args(sub)
    sub.add_argument("--sigma", help="covariance CSV; identity when omitted")
    sub.add_argument("--jacobian", default="closed_form",
                     choices=["closed_form", "monte_carlo"])
    sub.add_argument("--mc-a", type=float, default=0.01)
    sub.add_argument("--mc-m", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    sub.add_argument("--sigma2", type=float, help="known noise level; adds SURE")

    sub = subs.add_parser("experiment", help="run a simulation experiment to CSV")
    sub.add_argument("--config", required=True, help="experiment JSON config")
    sub.add_argument("--out", required=True, help="output CSV path")
    sub.add_argument("--seed", type=int, help="override master_seed")
    sub.add_argument("--threads", type=int, help="override worker count")
    sub.add_argument("--paper-scale", action="store_true",
                     help="swap in the full-size setup for this experiment kind")

    subs.add_parser("selftest", help="run the built-in invariant suites")
    return parser


def _parse_penalty(args: argparse.Namespace):
    if args.penalty == "none":
        return NoPenalty()
    if args.penalty == "l1":
        return L1Penalty(lam=args.lam)
    if args.penalty == "elastic_net":
        return ElasticNetPenalty(lam=args.lam, mu=args.mu)
    if args.rows is None or args.cols is None:
        raise ValueError("the nuclear penalty requires --rows and --cols")
    return NuclearPenalty(lam=args.lam, rows=args.rows, cols=args.cols)


def _fit_from_args(args: argparse.Namespace) -> tuple[FitResult, LossSpec, object, Dataset]:
    data = read_dataset_csv(args.data)
    loss = LossSpec(kind=args.loss, scale=args.scale)
    penalty = _parse_penalty(args)
    cfg = SolverConfig(kkt_tol=args.kkt_tol, max_iters=args.max_iters)
    return fit(loss, penalty, data, cfg), loss, penalty, data


def _fit_summary(fr: FitResult) -> dict:
    return {
        "n_active": fr.n_active,
        "n_inliers": fr.n_inliers,
        "kkt_gap": fr.kkt_gap,
        "iterations": fr.iterations,
        "converged": fr.converged,
        "objective": fr.objective,
        "beta_hat": [float(b) for b in fr.beta_hat],
    }


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_fit(args: argparse.Namespace) -> int:
    fr, _, _, _ = _fit_from_args(args)
    _emit(_fit_summary(fr), args.out)
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    fr, loss, penalty, data = _fit_from_args(args)
    sigma = read_matrix_csv(args.sigma) if args.sigma else np.eye(data.p)
    sigma_ops = SigmaOps(sigma)
    if args.jacobian == "closed_form":
        factors = closed_form_factors(fr, loss, penalty, data)
    else:
        factors = mc_factors(loss, penalty, data, None, args.mc_a, args.mc_m,
                             stream(args.seed, 3, 0), base=fr)
    if loss.kind == "square":
        report = square_loss_estimates(fr, data, sigma_ops, factors)
    else:
        report = hat_r(fr, data, sigma_ops, factors)
    payload = {
        "fit": _fit_summary(fr),
        "r_hat": report.r_hat,
        "tau2_hat": report.tau2_hat,
        "sigma2_hat": report.sigma2_hat,
        "factor": report.factor,
        "degenerate": report.degenerate,
        "df_hat": factors.df_hat,
        "trace_dpsi": factors.trace_dpsi,
        "jacobian_method": factors.method,
    }
    if args.sigma2 is not None:
        payload["sure"] = sure(fr, factors.df_hat, args.sigma2)
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace) -> int:
    with open(args.config) as fh:
        cfg_dict = json.load(fh)
    cfg = ExperimentConfig.model_validate(cfg_dict)
    if args.paper_scale:
        cfg = paper_scale_config(cfg.experiment, threads=cfg.threads,
                                 master_seed=cfg.master_seed)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"master_seed": args.seed})
    threads = resolve_threads(cfg, args.threads)
    rows = run_experiment(cfg, out_path=args.out, threads=threads)
    n_degenerate = sum(1 for r in rows if r.degenerate)
    print(f"wrote {len(rows)} rows to {args.out} ({n_degenerate} flagged degenerate)",
          file=sys.stderr)
    return EXIT_OK


def _cmd_selftest() -> int:
    checks = run_selftest()
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"[{status}] {c.name}"
        if c.detail:
            line += f" ({c.detail})"
        print(line)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_RUNTIME


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 for usage errors; keep 1 = validation.
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return _cmd_selftest()
    except (ValidationError, ValueError, OSError, json.JSONDecodeError, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except HdriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
