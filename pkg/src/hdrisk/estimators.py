"""Data-driven risk estimates built from the residual score and trace factors.

For a fit with residual score psi_hat and factors (df_hat, tr), the
out-of-sample error estimate is

    r_hat = tr^{-2} { ||psi_hat||^2 (2 df_hat - p) + ||Sigma^{-1/2} X' psi_hat||^2 }.

For the square loss, tr = n - df_hat and the triple (tau2_hat, r_hat,
sigma2_hat) estimates the generalization error, the out-of-sample error and
the noise level, with tau2_hat = r_hat + sigma2_hat by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datagen import Dataset
from .errors import DegenerateFactor, DimensionMismatch, UnsupportedPair
from .jacobians import JacobianFactors
from .linalg import psd_eigh
from .solvers import FitResult

# (tr/n)^2 below this gets flagged: the estimate is returned but untrusted.
DEGENERACY_THRESHOLD = 1e-2


class SigmaOps:
    """Cached eigendecomposition of a covariance matrix.

    Immutable after construction; shareable across threads.
    """

    def __init__(self, sigma_cov: np.ndarray):
        self.sigma = np.asarray(sigma_cov, dtype=float)
        self._w, self._v = psd_eigh(self.sigma)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    def inv_sqrt_apply(self, v: np.ndarray) -> np.ndarray:
        """Sigma^{-1/2} v."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.p:
            raise DimensionMismatch(f"vector length {v.shape[0]} != p={self.p}")
        return self._v @ ((self._v.T @ v) / np.sqrt(self._w))

    def whitened_sq_norm(self, v: np.ndarray) -> float:
        """||Sigma^{-1/2} v||^2 = v' Sigma^{-1} v."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.p:
            raise DimensionMismatch(f"vector length {v.shape[0]} != p={self.p}")
        c = self._v.T @ v
        return float(np.sum(c * c / self._w))


def sigma_inv_sqrt_apply(sigma_cov, v: np.ndarray) -> np.ndarray:
    """Sigma^{-1/2} v via a (possibly cached) eigendecomposition."""
    ops = sigma_cov if isinstance(sigma_cov, SigmaOps) else SigmaOps(sigma_cov)
    return ops.inv_sqrt_apply(v)


@dataclass(frozen=True)
class RiskReport:
    r_hat: float
    factor: float          # tr[d psi_hat / dy] / n
    degenerate: bool       # factor^2 below DEGENERACY_THRESHOLD
    factors: JacobianFactors
    tau2_hat: Optional[float] = None
    sigma2_hat: Optional[float] = None
    sure: Optional[float] = None


def _whitened_score_norm(fit_result: FitResult, data: Dataset, sigma_cov) -> tuple[SigmaOps, float]:
    ops = sigma_cov if isinstance(sigma_cov, SigmaOps) else SigmaOps(sigma_cov)
    if ops.p != data.p:
        raise DimensionMismatch(f"covariance is {ops.p}x{ops.p} but p={data.p}")
    xt_psi = data.x.T @ fit_result.psi_hat
    return ops, ops.whitened_sq_norm(xt_psi)


def hat_r(fit_result: FitResult, data: Dataset, sigma_cov,
          factors: JacobianFactors,
          degeneracy_threshold: float = DEGENERACY_THRESHOLD) -> RiskReport:
    """Out-of-sample error estimate for a general loss.

    Raises :class:`DegenerateFactor` only when the trace factor is exactly
    zero (every observation an outlier); small factors are flagged instead so
    the caller decides.
    """
    tr = factors.trace_dpsi
    if tr == 0.0:
        raise DegenerateFactor("trace of d psi_hat / dy is zero; r_hat is undefined")
    _, whitened = _whitened_score_norm(fit_result, data, sigma_cov)
    psi_sq = float(fit_result.psi_hat @ fit_result.psi_hat)
    r = (psi_sq * (2.0 * factors.df_hat - data.p) + whitened) / tr**2
    factor = tr / data.n
    return RiskReport(
        r_hat=float(r),
        factor=float(factor),
        degenerate=bool(factor**2 < degeneracy_threshold),
        factors=factors,
    )


def tau_squared(fit_result: FitResult, data: Dataset, factors: JacobianFactors) -> float:
    """Generalization-error estimate n ||psi_hat||^2 / (n - df_hat)^2.

    Needs no covariance knowledge, which makes it usable for model selection
    when Sigma is unknown.
    """
    n = data.n
    df = factors.df_hat
    if n - df <= np.sqrt(n) * 1e-6:
        raise DegenerateFactor(f"df_hat={df:.3f} too close to n={n}")
    psi_sq = float(fit_result.psi_hat @ fit_result.psi_hat)
    return n * psi_sq / (n - df) ** 2


def square_loss_estimates(fit_result: FitResult, data: Dataset, sigma_cov,
                          factors: JacobianFactors,
                          degeneracy_threshold: float = DEGENERACY_THRESHOLD) -> RiskReport:
    """(tau2_hat, r_hat, sigma2_hat) for the square loss.

    tau2_hat needs no covariance knowledge; r_hat and sigma2_hat consume
    Sigma through ||Sigma^{-1/2} X' psi_hat||^2.  Uses tr = n - df_hat, the
    square-loss chain rule.
    """
    n = data.n
    residual = data.y - data.x @ fit_result.beta_hat
    if not np.allclose(fit_result.psi_hat, residual, atol=1e-8 * (1.0 + np.abs(residual).max())):
        raise UnsupportedPair("square_loss_estimates requires a square-loss fit")
    df = factors.df_hat
    if n - df <= np.sqrt(n) * 1e-6:
        raise DegenerateFactor(f"df_hat={df:.3f} too close to n={n}")
    tr = n - df
    _, whitened = _whitened_score_norm(fit_result, data, sigma_cov)
    psi_sq = float(fit_result.psi_hat @ fit_result.psi_hat)
    tau2 = n * psi_sq / tr**2
    r = (psi_sq * (2.0 * df - data.p) + whitened) / tr**2
    sigma2 = (psi_sq * (n - (2.0 * df - data.p)) - whitened) / tr**2
    factor = tr / n
    return RiskReport(
        r_hat=float(r),
        factor=float(factor),
        degenerate=bool(factor**2 < degeneracy_threshold),
        factors=factors,
        tau2_hat=float(tau2),
        sigma2_hat=float(sigma2),
    )


def sure(fit_result: FitResult, df_hat: float, sigma2: float) -> float:
    """Stein's unbiased estimate of the in-sample error, ||psi_hat||^2 + 2 sigma^2 df - sigma^2 n.

    The noise level sigma2 is an input, never estimated internally.  For the
    square loss psi_hat is the residual vector, which is the intended use.
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    n = fit_result.psi_hat.shape[0]
    rss = float(fit_result.psi_hat @ fit_result.psi_hat)
    return rss + 2.0 * sigma2 * float(df_hat) - sigma2 * n
