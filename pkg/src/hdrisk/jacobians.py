"""The two trace factors of the risk estimate.

``df_hat`` is the trace of the Jacobian of y -> X beta_hat (effective degrees
of freedom) and ``trace_dpsi`` the trace of the Jacobian of y -> psi_hat.
Closed forms cover the l1 and elastic-net penalties; a Monte Carlo divergence
estimate covers everything else.  A central-difference Jacobian is included
as a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .datagen import Dataset
from .errors import FieldEvaluationFailure, NoClosedForm
from .losses import LossSpec
from .penalties import PenaltySpec
from .solvers import FitResult, SolverConfig, ensure_converged, fit

# Perturbed solves must be much more accurate than the perturbation itself or
# solver noise swamps the divergence estimate.
MC_KKT_TOL = 1e-10


@dataclass(frozen=True)
class JacobianFactors:
    df_hat: float
    trace_dpsi: float
    method: str  # "closed_form" or "monte_carlo"
    mc_a: Optional[float] = None
    mc_m: Optional[int] = None
    df_std_err: Optional[float] = None
    trace_std_err: Optional[float] = None


def _elastic_net_traces(fit_result: FitResult, data: Dataset, mu: float) -> tuple[float, float]:
    """Traces of eq-style closed forms for g = mu ||b||^2/2 + lam ||b||_1.

    With D = diag(psi') and S the active set,
    d(X beta)/dy = X_S (X_S' D X_S + n mu I)^{-1} X_S' D and
    d(psi)/dy    = D - D X_S (X_S' D X_S + n mu I)^{-1} X_S' D.
    """
    d = fit_result.psi_prime_hat
    active = fit_result.active_set
    trace_d = float(np.sum(d))
    if active.size == 0:
        return 0.0, trace_d
    xs = data.x[:, active]
    dxs = d[:, None] * xs
    b = xs.T @ dxs  # X_S' D X_S
    a = b + data.n * mu * np.eye(active.size)
    if mu > 0:
        # mu > 0 makes A positive definite, so factor it once.
        chol = np.linalg.cholesky(a)
        def solve_a(rhs):
            return np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        ainv_b = solve_a(b)
        ainv_cc = solve_a(dxs.T @ dxs)  # A^{-1} X_S' D^2 X_S
    else:
        # Pseudo-inverse fallback: drop directions below a relative cutoff.
        w, v = np.linalg.eigh(a)
        keep = w > 1e-12 * max(w[-1], 0.0)
        winv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
        pinv = (v * winv) @ v.T
        ainv_b = pinv @ b
        ainv_cc = pinv @ (dxs.T @ dxs)
    df_hat = float(np.trace(ainv_b))
    trace_dpsi = trace_d - float(np.trace(ainv_cc))
    return df_hat, trace_dpsi


def closed_form_factors(fit_result: FitResult, loss: LossSpec, penalty: PenaltySpec,
                        data: Dataset) -> JacobianFactors:
    """Closed-form (df_hat, trace_dpsi) where available.

    Raises :class:`NoClosedForm` for pairs without a formula (e.g. the
    nuclear norm); callers fall back to :func:`mc_factors`.
    """
    n = data.n
    if penalty.kind == "none":
        if loss.kind == "square" and data.p < n:
            return JacobianFactors(float(data.p), float(n - data.p), "closed_form")
        raise NoClosedForm(f"no closed form for {loss.kind} with no penalty at p>=n")
    if penalty.kind == "l1":
        k = fit_result.n_active
        if loss.kind == "square":
            return JacobianFactors(float(k), float(n - k), "closed_form")
        if loss.kind == "huber":
            return JacobianFactors(float(k), float(fit_result.n_inliers - k), "closed_form")
        raise NoClosedForm(f"no closed form for {loss.kind}+l1")
    if penalty.kind == "elastic_net":
        df_hat, trace_dpsi = _elastic_net_traces(fit_result, data, penalty.mu)
        return JacobianFactors(df_hat, trace_dpsi, "closed_form")
    raise NoClosedForm(f"no closed form for penalty {penalty.kind}")


def mc_divergence(field: Callable[[np.ndarray], np.ndarray], y: np.ndarray,
                  a: float, m: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo divergence (1/m) sum_k z_k' [F(y + a z_k) - F(y)] / a.

    Returns the estimate and the sample standard error of the m terms.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    y = np.asarray(y, dtype=float)
    f0 = field(y)
    terms = np.empty(m)
    for k in range(m):
        z = rng.standard_normal(y.shape[0])
        terms[k] = float(z @ (field(y + a * z) - f0)) / a
    est = float(terms.mean())
    se = float(terms.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return est, se


def mc_factors(loss: LossSpec, penalty: PenaltySpec, data: Dataset,
               cfg: Optional[SolverConfig], a: float, m: int,
               rng: np.random.Generator,
               base: Optional[FitResult] = None) -> JacobianFactors:
    """Monte Carlo (df_hat, trace_dpsi) for arbitrary (loss, penalty).

    Both divergences reuse one perturbed solve per probe direction, each
    warm-started from the base fit and solved to a tightened tolerance.
    """
    cfg = cfg or SolverConfig()
    if base is None:
        base = fit(loss, penalty, data, cfg)
    ensure_converged(base)
    tight = cfg.tightened(MC_KKT_TOL)

    def solve_at(y_pert: np.ndarray) -> FitResult:
        fr = fit(loss, penalty, data.with_response(y_pert), tight, beta0=base.beta_hat)
        if not fr.converged:
            raise FieldEvaluationFailure(
                f"perturbed solve did not converge (gap={fr.kkt_gap:.3e})"
            )
        return fr

    xb0 = data.x @ base.beta_hat
    psi0 = base.psi_hat
    df_terms = np.empty(m)
    tr_terms = np.empty(m)
    for k in range(m):
        z = rng.standard_normal(data.n)
        fr = solve_at(data.y + a * z)
        df_terms[k] = float(z @ (data.x @ fr.beta_hat - xb0)) / a
        tr_terms[k] = float(z @ (fr.psi_hat - psi0)) / a
    df_se = float(df_terms.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    tr_se = float(tr_terms.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return JacobianFactors(
        df_hat=float(df_terms.mean()),
        trace_dpsi=float(tr_terms.mean()),
        method="monte_carlo",
        mc_a=a,
        mc_m=m,
        df_std_err=df_se,
        trace_std_err=tr_se,
    )


def fd_jacobian(field: Callable[[np.ndarray], np.ndarray], y: np.ndarray,
                h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian of a vector field, column by column.

    Column l is [F(y + h e_l) - F(y - h e_l)] / (2h).  Exact for linear maps
    up to solver noise; used as an independent oracle in tests.
    """
    y = np.asarray(y, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + float(np.max(np.abs(y), initial=0.0)))
    if h <= 0:
        raise ValueError("h must be positive")
    n = y.shape[0]
    f0 = np.asarray(field(y))
    jac = np.empty((f0.shape[0], n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        jac[:, l] = (np.asarray(field(y + e)) - np.asarray(field(y - e))) / (2.0 * h)
    return jac
