"""Synthetic data generation and ground-truth metrics.

The linear model is y = X beta + eps with the rows of X iid N(0, Sigma) and
eps independent of X.  Noise can be Gaussian, heavy-tailed (Student t) or a
gross-errors mixture.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DimensionMismatch
from .linalg import psd_eigh, sqrt_psd


@dataclass(frozen=True)
class Dataset:
    """Observed design matrix and response."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"design {x.shape} incompatible with response {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def with_response(self, y: np.ndarray) -> "Dataset":
        return Dataset(self.x, y)


@dataclass(frozen=True)
class GroundTruth:
    """What the simulation knows and the estimators do not."""

    beta: np.ndarray
    sigma_cov: np.ndarray
    eps: np.ndarray
    sigma2_star: float  # ||eps||^2 / n, the realized noise level


class GaussianNoise(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(default=1.0, gt=0.0)


class StudentTNoise(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["student_t"] = "student_t"
    dof: int = Field(default=2, ge=1)


class ContaminatedNoise(BaseModel):
    """Gross-errors mixture: (1-q) N(0, sigma^2) + q N(0, (outlier_scale*sigma)^2).

    The contamination distribution is in principle arbitrary; a scaled
    Gaussian is used here so runs are reproducible.
    """

    model_config = ConfigDict(frozen=True)
    kind: Literal["contaminated"] = "contaminated"
    sigma: float = Field(default=1.0, gt=0.0)
    q: float = Field(default=0.1, ge=0.0, le=1.0)
    outlier_scale: float = Field(default=10.0, gt=0.0)


NoiseSpec = Annotated[
    Union[GaussianNoise, StudentTNoise, ContaminatedNoise], Field(discriminator="kind")
]


class IdentityCovariance(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["identity"] = "identity"


class ScaledWishartCovariance(BaseModel):
    """Sigma = W / (dof_multiplier * p) with W ~ Wishart(I_p, dof_multiplier * p)."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["scaled_wishart"] = "scaled_wishart"
    dof_multiplier: int = Field(default=5, ge=1)


CovarianceSpec = Annotated[
    Union[IdentityCovariance, ScaledWishartCovariance], Field(discriminator="kind")
]


class SparseFlatSignal(BaseModel):
    """s nonzero coefficients, all equal to ``amplitude``."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["sparse_flat"] = "sparse_flat"
    s: int = Field(default=0, ge=0)
    amplitude: float = 1.0


class LowRankSignal(BaseModel):
    """beta such that mat(beta) in R^{rows x cols} has iid N(0,1) entries in its
    first ``rank`` columns and zeros elsewhere."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["low_rank"] = "low_rank"
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    rank: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _check_rank(self):
        if self.rank > min(self.rows, self.cols):
            raise ValueError("rank must be at most min(rows, cols)")
        return self


SignalSpec = Annotated[Union[SparseFlatSignal, LowRankSignal], Field(discriminator="kind")]


def gen_covariance(spec: CovarianceSpec, p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a p x p symmetric positive-definite covariance matrix."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if spec.kind == "identity":
        return np.eye(p)
    dof = spec.dof_multiplier * p
    g = rng.standard_normal((dof, p))
    sigma = (g.T @ g) / dof
    # dof > p, so the draw is full rank almost surely; validate anyway.
    psd_eigh(sigma)
    return sigma


def gen_signal(spec: SignalSpec, p: int, rng: np.random.Generator) -> np.ndarray:
    """Materialize the true coefficient vector for a signal spec."""
    if spec.kind == "sparse_flat":
        if spec.s > p:
            raise DimensionMismatch(f"s={spec.s} exceeds p={p}")
        beta = np.zeros(p)
        beta[: spec.s] = spec.amplitude
        return beta
    if spec.rows * spec.cols != p:
        raise DimensionMismatch(f"rows*cols={spec.rows * spec.cols} != p={p}")
    m = np.zeros((spec.rows, spec.cols))
    if spec.rank > 0:
        m[:, : spec.rank] = rng.standard_normal((spec.rows, spec.rank))
    # Column-major ravel: mat() is the inverse of the usual vectorization.
    return m.ravel(order="F")


def gen_noise(spec: NoiseSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "gaussian":
        return spec.sigma * rng.standard_normal(n)
    if spec.kind == "student_t":
        return rng.standard_t(spec.dof, size=n)
    z = spec.sigma * rng.standard_normal(n)
    corrupted = rng.random(n) < spec.q
    z[corrupted] *= spec.outlier_scale
    return z


def gen_dataset(
    n: int,
    sigma_cov: np.ndarray,
    beta: np.ndarray,
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> tuple[Dataset, GroundTruth]:
    """Draw (X, y) with X rows iid N(0, Sigma) and y = X beta + eps."""
    beta = np.asarray(beta, dtype=float)
    sigma_cov = np.asarray(sigma_cov, dtype=float)
    p = beta.shape[0]
    if sigma_cov.shape != (p, p):
        raise DimensionMismatch(f"covariance shape {sigma_cov.shape} != ({p}, {p})")
    root = sqrt_psd(sigma_cov)  # raises NonPositiveDefinite when Sigma is singular
    x = rng.standard_normal((n, p)) @ root
    eps = gen_noise(noise, n, rng)
    y = x @ beta + eps
    truth = GroundTruth(
        beta=beta,
        sigma_cov=sigma_cov,
        eps=eps,
        sigma2_star=float(eps @ eps / n),
    )
    return Dataset(x, y), truth


def oos_error(beta_hat: np.ndarray, truth: GroundTruth) -> float:
    """Out-of-sample error ||Sigma^{1/2}(beta_hat - beta)||^2 = h' Sigma h."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != truth.beta.shape:
        raise DimensionMismatch(
            f"beta_hat shape {beta_hat.shape} != beta shape {truth.beta.shape}"
        )
    h = beta_hat - truth.beta
    return float(h @ truth.sigma_cov @ h)
