"""Simulation harness: run estimator-vs-truth experiments over tuning grids.

Each replication owns a counter-based RNG stream derived from
(master_seed, rep), so the emitted row set is identical for any thread
count.  Failed grid points degrade to flagged rows instead of aborting the
run.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import rng as rngmod
from .datagen import (
    CovarianceSpec,
    GaussianNoise,
    IdentityCovariance,
    LowRankSignal,
    NoiseSpec,
    ScaledWishartCovariance,
    SignalSpec,
    SparseFlatSignal,
    StudentTNoise,
    gen_covariance,
    gen_dataset,
    gen_signal,
    oos_error,
)
from .errors import HdriskError
from .estimators import SigmaOps, hat_r, square_loss_estimates
from .jacobians import closed_form_factors, mc_factors
from .losses import LossSpec
from .penalties import ElasticNetPenalty, L1Penalty, NoPenalty, NuclearPenalty
from .solvers import SolverConfig, ensure_converged, fit

logger = logging.getLogger(__name__)

ExperimentKind = Literal["huber_grid", "nuclear_norm", "ols_calibration", "sigma_recovery"]


class ClosedFormJacobian(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["closed_form"] = "closed_form"


class MonteCarloJacobian(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["monte_carlo"] = "monte_carlo"
    a: float = Field(default=0.01, gt=0.0)
    m: int = Field(default=100, ge=1)


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)
    lambdas: list[float] = Field(min_length=1)
    lambda_stars: list[float] = Field(default_factory=list)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    experiment: ExperimentKind
    n: int = Field(ge=1)
    p: int = Field(ge=1)
    reps: int = Field(ge=1)
    master_seed: int = 0
    grids: GridSpec
    noise: NoiseSpec = GaussianNoise()
    covariance: CovarianceSpec = IdentityCovariance()
    signal: SignalSpec = SparseFlatSignal()
    jacobian: ClosedFormJacobian | MonteCarloJacobian = Field(
        default=ClosedFormJacobian(), discriminator="kind"
    )
    threads: int = Field(default=1, ge=1)
    mu: float = Field(default=0.0, ge=0.0)  # elastic-net strength (sigma_recovery)
    solver: SolverConfig = SolverConfig()

    @model_validator(mode="after")
    def _check_experiment(self):
        if self.experiment == "huber_grid" and not self.grids.lambda_stars:
            raise ValueError("huber_grid requires a nonempty lambda_stars grid")
        if self.experiment == "nuclear_norm":
            if self.signal.kind != "low_rank":
                raise ValueError("nuclear_norm requires a low_rank signal")
            if self.jacobian.kind != "monte_carlo":
                raise ValueError("nuclear_norm has no closed-form factors; use monte_carlo")
        if self.signal.kind == "sparse_flat" and self.signal.s > self.p:
            raise ValueError("signal sparsity s exceeds p")
        if self.signal.kind == "low_rank" and self.signal.rows * self.signal.cols != self.p:
            raise ValueError("signal rows*cols must equal p")
        return self


RESULT_COLUMNS = (
    "rep", "lambda", "lambda_star", "oos_error", "r_hat", "tau2_hat", "sigma2_hat",
    "sigma2_star", "df_hat", "trace_dpsi", "n_active", "n_inliers", "kkt_gap",
    "degenerate", "wall_ms",
)


@dataclass(frozen=True)
class ResultRow:
    rep: int
    lam: float
    lam_star: Optional[float]
    oos_error: float
    r_hat: float
    tau2_hat: Optional[float]
    sigma2_hat: Optional[float]
    sigma2_star: float
    df_hat: float
    trace_dpsi: float
    n_active: Optional[int]
    n_inliers: Optional[int]
    kkt_gap: float
    degenerate: bool
    wall_ms: float

    def as_csv_fields(self) -> list[str]:
        vals = (
            self.rep, self.lam, self.lam_star, self.oos_error, self.r_hat,
            self.tau2_hat, self.sigma2_hat, self.sigma2_star, self.df_hat,
            self.trace_dpsi, self.n_active, self.n_inliers, self.kkt_gap,
            self.degenerate, self.wall_ms,
        )
        return [_fmt(v) for v in vals]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "nan"
    return str(v)


def _grid_points(cfg: ExperimentConfig) -> list[tuple[float, Optional[float]]]:
    if cfg.experiment == "huber_grid":
        return [(lam, ls) for lam in cfg.grids.lambdas for ls in cfg.grids.lambda_stars]
    return [(lam, None) for lam in cfg.grids.lambdas]


def _loss_penalty(cfg: ExperimentConfig, lam: float, lam_star: Optional[float]):
    if cfg.experiment == "huber_grid":
        return (
            LossSpec(kind="huber", scale=math.sqrt(cfg.n) * lam_star),
            L1Penalty(lam=lam),
        )
    if cfg.experiment == "ols_calibration":
        return LossSpec(kind="square"), NoPenalty()
    if cfg.experiment == "sigma_recovery":
        return LossSpec(kind="square"), ElasticNetPenalty(lam=lam, mu=cfg.mu)
    return (
        LossSpec(kind="square"),
        NuclearPenalty(lam=lam, rows=cfg.signal.rows, cols=cfg.signal.cols),
    )


def _failure_row(rep: int, lam: float, lam_star: Optional[float], sigma2_star: float,
                 wall_ms: float) -> ResultRow:
    nan = float("nan")
    return ResultRow(
        rep=rep, lam=lam, lam_star=lam_star, oos_error=nan, r_hat=nan,
        tau2_hat=None, sigma2_hat=None, sigma2_star=sigma2_star, df_hat=nan,
        trace_dpsi=nan, n_active=None, n_inliers=None, kkt_gap=nan,
        degenerate=True, wall_ms=wall_ms,
    )


def _run_replication(cfg: ExperimentConfig, rep: int) -> list[ResultRow]:
    sigma = gen_covariance(cfg.covariance, cfg.p, rngmod.covariance_stream(cfg.master_seed))
    beta = gen_signal(cfg.signal, cfg.p, rngmod.signal_stream(cfg.master_seed))
    rep_rng = rngmod.replication_stream(cfg.master_seed, rep)
    data, truth = gen_dataset(cfg.n, sigma, beta, cfg.noise, rep_rng)
    sigma_ops = SigmaOps(sigma)

    rows: list[ResultRow] = []
    warm: dict[Optional[float], np.ndarray] = {}
    for gi, (lam, lam_star) in enumerate(_grid_points(cfg)):
        t0 = time.perf_counter()
        try:
            loss, penalty = _loss_penalty(cfg, lam, lam_star)
            fr = fit(loss, penalty, data, cfg.solver, beta0=warm.get(lam_star))
            warm[lam_star] = fr.beta_hat
            ensure_converged(fr)
            if cfg.jacobian.kind == "closed_form":
                factors = closed_form_factors(fr, loss, penalty, data)
            else:
                mc_rng = rngmod.stream(cfg.master_seed, 2, rep, gi)
                factors = mc_factors(
                    loss, penalty, data, cfg.solver,
                    cfg.jacobian.a, cfg.jacobian.m, mc_rng, base=fr,
                )
            if loss.kind == "square":
                report = square_loss_estimates(fr, data, sigma_ops, factors)
            else:
                report = hat_r(fr, data, sigma_ops, factors)
            wall_ms = (time.perf_counter() - t0) * 1e3
            rows.append(ResultRow(
                rep=rep, lam=lam, lam_star=lam_star,
                oos_error=oos_error(fr.beta_hat, truth),
                r_hat=report.r_hat, tau2_hat=report.tau2_hat,
                sigma2_hat=report.sigma2_hat, sigma2_star=truth.sigma2_star,
                df_hat=factors.df_hat, trace_dpsi=factors.trace_dpsi,
                n_active=fr.n_active, n_inliers=fr.n_inliers,
                kkt_gap=fr.kkt_gap, degenerate=report.degenerate,
                wall_ms=wall_ms,
            ))
        except HdriskError as exc:
            wall_ms = (time.perf_counter() - t0) * 1e3
            logger.warning("rep=%d lambda=%g lambda_star=%s failed: %s", rep, lam, lam_star, exc)
            rows.append(_failure_row(rep, lam, lam_star, truth.sigma2_star, wall_ms))
    return rows


def _worker(payload: tuple[dict, int]) -> list[ResultRow]:
    cfg_dict, rep = payload
    return _run_replication(ExperimentConfig.model_validate(cfg_dict), rep)


def resolve_threads(cfg: ExperimentConfig, override: Optional[int] = None) -> int:
    """Thread count: explicit override, then HDRISK_THREADS, then the config."""
    if override is not None:
        return max(1, override)
    env = os.environ.get("HDRISK_THREADS")
    if env:
        return max(1, int(env))
    return cfg.threads


def run_experiment(cfg: ExperimentConfig, out_path: Optional[str] = None,
                   threads: Optional[int] = None) -> list[ResultRow]:
    """Run all replications over the grid; optionally write the CSV.

    Rows come back sorted by (rep, grid index) no matter how many workers
    ran, so repeated runs with one seed are byte-identical.
    """
    workers = resolve_threads(cfg, threads)
    if workers <= 1 or cfg.reps == 1:
        per_rep = [_run_replication(cfg, rep) for rep in range(cfg.reps)]
    else:
        payloads = [(cfg.model_dump(), rep) for rep in range(cfg.reps)]
        with ProcessPoolExecutor(max_workers=min(workers, cfg.reps)) as pool:
            per_rep = list(pool.map(_worker, payloads))
    rows = [row for rep_rows in per_rep for row in rep_rows]
    if out_path is not None:
        write_rows_csv(rows, out_path)
    return rows


def rows_csv_text(rows: list[ResultRow]) -> str:
    """Render rows as CSV text: RFC-4180 quoting, LF line endings, fixed header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_fields())
    return buf.getvalue()


def write_rows_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_csv_text(rows))


def read_rows_csv(path: str) -> list[dict]:
    """Read a results CSV back into dicts of parsed values."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            parsed = {}
            for key, raw in rec.items():
                if raw == "":
                    parsed[key] = None
                elif key in ("rep", "n_active", "n_inliers"):
                    parsed[key] = int(raw)
                elif key == "degenerate":
                    parsed[key] = raw == "true"
                else:
                    parsed[key] = float(raw)
            out.append(parsed)
    return out


# ---------------------------------------------------------------------------
# Paper-scale configurations
# ---------------------------------------------------------------------------

def paper_scale_config(experiment: ExperimentKind, threads: int = 1,
                       master_seed: int = 0) -> ExperimentConfig:
    """Full-size simulation setups; desk-scale runs shrink n, p and reps."""
    if experiment == "huber_grid":
        n, p = 1001, 1000
        return ExperimentConfig(
            experiment="huber_grid", n=n, p=p, reps=100, master_seed=master_seed,
            grids=GridSpec(
                lambdas=[0.1 * n ** -0.5 * 1.5**k for k in range(16)],
                lambda_stars=[0.1 * n ** -0.5 * 1.5**k for k in range(9)],
            ),
            noise=StudentTNoise(dof=2),
            covariance=IdentityCovariance(),
            signal=SparseFlatSignal(s=100, amplitude=10.0 * p ** -0.5),
            jacobian=ClosedFormJacobian(),
            threads=threads,
        )
    if experiment == "nuclear_norm":
        n, p = 400, 500
        return ExperimentConfig(
            experiment="nuclear_norm", n=n, p=p, reps=10, master_seed=master_seed,
            grids=GridSpec(lambdas=[0.5 * 1.3**k * n ** -0.5 for k in range(15)]),
            noise=GaussianNoise(sigma=math.sqrt(2.0)),
            covariance=ScaledWishartCovariance(dof_multiplier=5),
            signal=LowRankSignal(rows=20, cols=25, rank=3),
            jacobian=MonteCarloJacobian(a=0.01, m=100),
            threads=threads,
        )
    raise ValueError(f"no paper-scale setup for experiment {experiment!r}")
