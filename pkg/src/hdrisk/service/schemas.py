"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..harness import ExperimentConfig
from ..losses import LossSpec
from ..penalties import PenaltySpec
from ..solvers import SolverConfig


class DatasetPayload(BaseModel):
    x: list[list[float]]
    y: list[float]


class FitRequest(BaseModel):
    dataset: DatasetPayload
    loss: LossSpec = LossSpec(kind="square")
    penalty: PenaltySpec = Field(default_factory=lambda: {"kind": "l1", "lam": 0.1})
    solver: SolverConfig = SolverConfig()
    include_beta: bool = False


class FitSummary(BaseModel):
    n: int
    p: int
    n_active: int
    n_inliers: int
    kkt_gap: float
    iterations: int
    converged: bool
    objective: float
    beta_hat: Optional[list[float]] = None


class JacobianRequest(BaseModel):
    kind: Literal["closed_form", "monte_carlo"] = "closed_form"
    a: float = Field(default=0.01, gt=0.0)
    m: int = Field(default=100, ge=1)
    seed: int = 0


class EstimateRequest(FitRequest):
    # Identity covariance unless an explicit matrix is supplied.
    sigma: Optional[list[list[float]]] = None
    jacobian: JacobianRequest = JacobianRequest()
    sigma2: Optional[float] = Field(default=None, ge=0.0, description="known noise level, adds SURE")


class RiskResponse(BaseModel):
    fit: FitSummary
    r_hat: float
    tau2_hat: Optional[float] = None
    sigma2_hat: Optional[float] = None
    sure: Optional[float] = None
    factor: float
    degenerate: bool
    df_hat: float
    trace_dpsi: float
    jacobian_method: str
    df_std_err: Optional[float] = None
    trace_std_err: Optional[float] = None


class ExperimentSubmission(BaseModel):
    config: ExperimentConfig


class JobCreated(BaseModel):
    job_id: str


class JobStatus(BaseModel):
    job_id: str
    state: Literal["running", "done", "failed"]
    n_rows: Optional[int] = None
    n_degenerate: Optional[int] = None
    error: Optional[str] = None


class SelftestCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestResponse(BaseModel):
    passed: bool
    checks: list[SelftestCheck]
