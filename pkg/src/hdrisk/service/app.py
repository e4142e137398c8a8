"""FastAPI service wrapping the core package.

Fit and estimate run synchronously; experiments run as background jobs with
the CSV retrievable once done.  Run with `uvicorn hdrisk.service:app`.
"""
from __future__ import annotations

import io as std_io
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from ..datagen import Dataset
from ..errors import DimensionMismatch, HdriskError, NoClosedForm
from ..estimators import SigmaOps, hat_r, square_loss_estimates, sure
from ..harness import ResultRow, rows_csv_text, run_experiment
from ..jacobians import JacobianFactors, closed_form_factors, mc_factors
from ..rng import stream
from ..selftest import run_selftest
from ..solvers import FitResult, fit
from .schemas import (
    EstimateRequest,
    ExperimentSubmission,
    FitRequest,
    FitSummary,
    JobCreated,
    JobStatus,
    RiskResponse,
    SelftestCheck,
    SelftestResponse,
)

app = FastAPI(
    title="hdrisk",
    description="Penalized M-estimators with data-driven out-of-sample error estimates",
    version="0.1.0",
)


@dataclass
class _Job:
    state: str = "running"
    rows: Optional[list[ResultRow]] = None
    error: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)


_jobs: dict[str, _Job] = {}


def _dataset_from(req: FitRequest) -> Dataset:
    try:
        return Dataset(np.asarray(req.dataset.x, dtype=float),
                       np.asarray(req.dataset.y, dtype=float))
    except (DimensionMismatch, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _summary(fr: FitResult, data: Dataset, include_beta: bool) -> FitSummary:
    return FitSummary(
        n=data.n, p=data.p,
        n_active=fr.n_active, n_inliers=fr.n_inliers,
        kkt_gap=fr.kkt_gap, iterations=fr.iterations,
        converged=fr.converged, objective=fr.objective,
        beta_hat=[float(b) for b in fr.beta_hat] if include_beta else None,
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": app.version}


@app.post("/fit", response_model=FitSummary)
def fit_endpoint(req: FitRequest) -> FitSummary:
    data = _dataset_from(req)
    try:
        fr = fit(req.loss, req.penalty, data, req.solver)
    except HdriskError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return _summary(fr, data, req.include_beta)


@app.post("/estimate", response_model=RiskResponse)
def estimate_endpoint(req: EstimateRequest) -> RiskResponse:
    data = _dataset_from(req)
    try:
        fr = fit(req.loss, req.penalty, data, req.solver)
        sigma = np.asarray(req.sigma, dtype=float) if req.sigma is not None else np.eye(data.p)
        sigma_ops = SigmaOps(sigma)
        factors: JacobianFactors
        if req.jacobian.kind == "closed_form":
            factors = closed_form_factors(fr, req.loss, req.penalty, data)
        else:
            factors = mc_factors(req.loss, req.penalty, data, req.solver,
                                 req.jacobian.a, req.jacobian.m,
                                 stream(req.jacobian.seed, 3, 0), base=fr)
        if req.loss.kind == "square":
            report = square_loss_estimates(fr, data, sigma_ops, factors)
        else:
            report = hat_r(fr, data, sigma_ops, factors)
    except NoClosedForm as exc:
        raise HTTPException(
            status_code=422,
            detail=f"{exc}; request jacobian.kind='monte_carlo'",
        ) from exc
    except HdriskError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return RiskResponse(
        fit=_summary(fr, data, req.include_beta),
        r_hat=report.r_hat,
        tau2_hat=report.tau2_hat,
        sigma2_hat=report.sigma2_hat,
        sure=sure(fr, factors.df_hat, req.sigma2) if req.sigma2 is not None else None,
        factor=report.factor,
        degenerate=report.degenerate,
        df_hat=factors.df_hat,
        trace_dpsi=factors.trace_dpsi,
        jacobian_method=factors.method,
        df_std_err=factors.df_std_err,
        trace_std_err=factors.trace_std_err,
    )


def _run_job(job_id: str, submission: ExperimentSubmission) -> None:
    job = _jobs[job_id]
    try:
        rows = run_experiment(submission.config)
        with job.lock:
            job.rows = rows
            job.state = "done"
    except Exception as exc:  # surface any failure through the status endpoint
        with job.lock:
            job.error = str(exc)
            job.state = "failed"


@app.post("/experiments", response_model=JobCreated)
def submit_experiment(submission: ExperimentSubmission) -> JobCreated:
    job_id = uuid.uuid4().hex
    _jobs[job_id] = _Job()
    thread = threading.Thread(target=_run_job, args=(job_id, submission), daemon=True)
    thread.start()
    return JobCreated(job_id=job_id)


def _get_job(job_id: str) -> _Job:
    job = _jobs.get(job_id)
    if job is None:
        raise HTTPException(status_code=404, detail=f"no such job {job_id}")
    return job


@app.get("/experiments/{job_id}", response_model=JobStatus)
def experiment_status(job_id: str) -> JobStatus:
    job = _get_job(job_id)
    with job.lock:
        return JobStatus(
            job_id=job_id,
            state=job.state,
            n_rows=len(job.rows) if job.rows is not None else None,
            n_degenerate=sum(r.degenerate for r in job.rows) if job.rows is not None else None,
            error=job.error,
        )


@app.get("/experiments/{job_id}/csv")
def experiment_csv(job_id: str) -> PlainTextResponse:
    job = _get_job(job_id)
    with job.lock:
        if job.state != "done":
            raise HTTPException(status_code=409, detail=f"job is {job.state}")
        rows = job.rows
    return PlainTextResponse(rows_csv_text(rows), media_type="text/csv")


@app.post("/selftest", response_model=SelftestResponse)
def selftest_endpoint() -> SelftestResponse:
    checks = run_selftest()
    return SelftestResponse(
        passed=all(c.passed for c in checks),
        checks=[SelftestCheck(name=c.name, passed=c.passed, detail=c.detail) for c in checks],
    )
