"""Solvers for the penalized M-estimator

    beta_hat = argmin_b (1/n) sum_i rho(y_i - x_i' b) + g(b)

with a certified KKT gap.  Dispatch: square loss + l1 goes to cyclic
coordinate descent, Huber + l1 to an augmented Lasso in R^{p+n}, everything
else to accelerated proximal gradient (FISTA) with monotone restarts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .datagen import Dataset
from .errors import DimensionMismatch, UnsupportedPair
from .linalg import op_norm
from .losses import LossSpec, loss_eval_vec, psi_vec, rho_sum
from .penalties import (
    L1Penalty,
    PenaltySpec,
    as_matrix,
    penalty_value,
    prox_penalty,
)

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(default=50_000, ge=0)
    kkt_tol: float = Field(default=1e-8, gt=0.0)
    # None means 1e-9 * (1 + ||beta_hat||_inf), resolved per fit.
    support_tol: Optional[float] = Field(default=None, gt=0.0)
    algorithm: Literal["auto", "coordinate_descent", "fista", "augmented_lasso"] = "auto"

    def tightened(self, kkt_tol: float) -> "SolverConfig":
        return self.model_copy(update={"kkt_tol": min(self.kkt_tol, kkt_tol)})


@dataclass
class FitResult:
    """A fitted estimator plus the quantities the risk estimators consume."""

    beta_hat: np.ndarray
    psi_hat: np.ndarray
    psi_prime_hat: np.ndarray
    active_set: np.ndarray  # indices j with |beta_j| > support tolerance
    inlier_set: np.ndarray  # indices i with psi'(residual_i) > 0
    kkt_gap: float
    iterations: int
    converged: bool
    objective: float
    objective_history: np.ndarray = field(repr=False, default=None)

    @property
    def n_active(self) -> int:
        return int(self.active_set.size)

    @property
    def n_inliers(self) -> int:
        return int(self.inlier_set.size)


def resolve_support_tol(cfg: SolverConfig, beta: np.ndarray) -> float:
    if cfg.support_tol is not None:
        return cfg.support_tol
    return 1e-9 * (1.0 + float(np.max(np.abs(beta), initial=0.0)))


def kkt_gap(beta: np.ndarray, loss: LossSpec, penalty: PenaltySpec, data: Dataset,
            support_tol: Optional[float] = None) -> float:
    """Violation of the stationarity condition X' psi_hat in n * dg(beta).

    Zero iff beta is optimal; scale-compatible with the penalty parameters.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise DimensionMismatch(f"beta shape {beta.shape} != ({data.p},)")
    psi = psi_vec(loss, data.y - data.x @ beta)
    g = data.x.T @ psi / data.n
    if penalty.kind == "none":
        return float(np.max(np.abs(g), initial=0.0))
    if penalty.kind in ("l1", "elastic_net"):
        mu = penalty.mu if penalty.kind == "elastic_net" else 0.0
        lam = penalty.lam
        tol = support_tol if support_tol is not None else 1e-9 * (1.0 + np.max(np.abs(beta), initial=0.0))
        grad = g - mu * beta
        active = np.abs(beta) > tol
        gap = 0.0
        if np.any(active):
            gap = float(np.max(np.abs(grad[active] - lam * np.sign(beta[active]))))
        if np.any(~active):
            gap = max(gap, float(np.max(np.maximum(np.abs(grad[~active]) - lam, 0.0))))
        return gap
    # Nuclear norm: split the dual matrix along the fitted singular subspaces.
    gm = as_matrix(g, penalty.rows, penalty.cols)
    bm = as_matrix(beta, penalty.rows, penalty.cols)
    u, sv, vt = np.linalg.svd(bm, full_matrices=False)
    tol = support_tol if support_tol is not None else 1e-9 * (1.0 + (sv[0] if sv.size else 0.0))
    r = int(np.sum(sv > tol))
    lam = penalty.lam
    if r == 0:
        return max(0.0, float(np.linalg.norm(gm, 2)) - lam)
    uu, vv = u[:, :r], vt[:r, :].T
    gv = gm @ vv
    utg = uu.T @ gm
    g11 = uu.T @ gv
    r1 = utg - g11 @ vv.T        # component in row space of U only
    r2 = gv - uu @ g11           # component in column space of V only
    g22 = gm - uu @ utg - r2 @ vv.T
    align = max(
        float(np.linalg.norm(g11 - lam * np.eye(r), 2)),
        float(np.linalg.norm(r1, 2)),
        float(np.linalg.norm(r2, 2)),
    )
    return max(0.0, float(np.linalg.norm(g22, 2)) - lam) + align


def objective_value(beta: np.ndarray, loss: LossSpec, penalty: PenaltySpec, data: Dataset) -> float:
    return rho_sum(loss, data.y - data.x @ beta) / data.n + penalty_value(penalty, beta)


# ---------------------------------------------------------------------------
# Cyclic coordinate descent for the square loss (l1 / elastic-net / none)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _cd_square_kernel(x, y, lam, mu, beta, max_sweeps, kkt_tol, obj_out):  # pragma: no cover - compiled
    n, p = x.shape
    r = y - x @ beta
    col_sq = np.empty(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += x[i, j] * x[i, j]
        col_sq[j] = s
    sweeps = 0
    gap = np.inf
    for sweep in range(max_sweeps + 1):
        # KKT gap and objective at the current point.
        gap = 0.0
        for j in range(p):
            xjr = 0.0
            for i in range(n):
                xjr += x[i, j] * r[i]
            grad = xjr / n - mu * beta[j]
            if beta[j] != 0.0:
                viol = abs(grad - lam * np.sign(beta[j]))
            else:
                viol = abs(grad) - lam
                if viol < 0.0:
                    viol = 0.0
            if viol > gap:
                gap = viol
        obj = 0.0
        for i in range(n):
            obj += r[i] * r[i]
        obj /= 2.0 * n
        for j in range(p):
            obj += lam * abs(beta[j]) + 0.5 * mu * beta[j] * beta[j]
        obj_out[sweep] = obj
        if gap <= kkt_tol or sweep == max_sweeps:
            sweeps = sweep
            break
        # One cyclic sweep.
        for j in range(p):
            bj = beta[j]
            xjr = 0.0
            for i in range(n):
                xjr += x[i, j] * r[i]
            rho = xjr / n + col_sq[j] / n * bj
            denom = col_sq[j] / n + mu
            z = abs(rho) - lam
            if z <= 0.0 or denom <= 0.0:
                new = 0.0
            else:
                new = np.sign(rho) * z / denom
            d = new - bj
            if d != 0.0:
                for i in range(n):
                    r[i] -= x[i, j] * d
                beta[j] = new
    return sweeps, gap


def _fit_cd_square(penalty: PenaltySpec, data: Dataset, cfg: SolverConfig,
                   beta0: Optional[np.ndarray]) -> tuple[np.ndarray, int, float, np.ndarray]:
    lam = penalty.lam if penalty.kind in ("l1", "elastic_net") else 0.0
    mu = penalty.mu if penalty.kind == "elastic_net" else 0.0
    x = np.asfortranarray(data.x)
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    obj_out = np.empty(cfg.max_iters + 1)
    sweeps, gap = _cd_square_kernel(
        x, np.ascontiguousarray(data.y), lam, mu, beta,
        cfg.max_iters, cfg.kkt_tol, obj_out,
    )
    return beta, int(sweeps), float(gap), obj_out[: int(sweeps) + 1].copy()


# ---------------------------------------------------------------------------
# FISTA with monotone restarts
# ---------------------------------------------------------------------------

def _fit_fista(loss: LossSpec, penalty: PenaltySpec, data: Dataset, cfg: SolverConfig,
               beta0: Optional[np.ndarray], check_every: int = 5,
               ) -> tuple[np.ndarray, int, float, np.ndarray]:
    x, y, n = data.x, data.y, data.n
    lip = op_norm(x) ** 2 / n
    step = 1.0 / lip if lip > 0 else 1.0

    def grad(b: np.ndarray) -> np.ndarray:
        return -(x.T @ psi_vec(loss, y - x @ b)) / n

    def fval(b: np.ndarray) -> float:
        return rho_sum(loss, y - x @ b) / n + penalty_value(penalty, b)

    cur = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    # Ensure the starting point is a prox output so its support is exact.
    cur = prox_penalty(penalty, cur - step * grad(cur), step)
    mom = cur.copy()
    t = 1.0
    f_cur = fval(cur)
    history = [f_cur]
    gap = kkt_gap(cur, loss, penalty, data, cfg.support_tol)
    it = 0
    while gap > cfg.kkt_tol and it < cfg.max_iters:
        nxt = prox_penalty(penalty, mom - step * grad(mom), step)
        f_nxt = fval(nxt)
        if f_nxt > f_cur:
            # Momentum overshot: restart from the last accepted iterate.
            nxt = prox_penalty(penalty, cur - step * grad(cur), step)
            f_nxt = fval(nxt)
            t = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        mom = nxt + ((t - 1.0) / t_next) * (nxt - cur)
        cur, f_cur, t = nxt, f_nxt, t_next
        history.append(f_cur)
        it += 1
        if it % check_every == 0 or it == cfg.max_iters:
            gap = kkt_gap(cur, loss, penalty, data, cfg.support_tol)
    return cur, it, float(gap), np.asarray(history)


# ---------------------------------------------------------------------------
# Huber + l1 via the augmented Lasso in R^{p+n}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AugmentedLasso:
    """Lasso formulation of the Huber+l1 fit.

    Design [X | c I_n] with c = sqrt(n) * lam / lam_star, response y, and an
    l1 penalty lam on all p+n coordinates.  The auxiliary block marks the
    outliers: theta_i != 0 exactly when observation i lies outside the elbow.
    """

    design: np.ndarray
    response: np.ndarray
    lam: float
    aux_scale: float  # the constant c multiplying the identity block
    p: int

    def back_map(self, b_bar: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        b_bar = np.asarray(b_bar, dtype=float)
        beta = b_bar[: self.p].copy()
        theta = b_bar[self.p:].copy()
        inliers = np.flatnonzero(theta == 0.0)
        return beta, theta, inliers


def augment_huber(data: Dataset, lam: float, lam_star: float) -> AugmentedLasso:
    """Build the augmented Lasso equivalent to the Huber+l1 fit.

    The Huber loss scale is Lambda_* = sqrt(n) * lam_star: solving the
    augmented problem and keeping the first p coordinates minimizes
    (1/n) sum_i Lambda_*^2 rho_H(u_i / Lambda_*) + lam * ||b||_1.
    """
    if lam <= 0 or lam_star <= 0:
        raise ValueError("lam and lam_star must be positive")
    n = data.n
    c = np.sqrt(n) * lam / lam_star
    design = np.concatenate([data.x, c * np.eye(n)], axis=1)
    return AugmentedLasso(design=design, response=data.y, lam=lam, aux_scale=c, p=data.p)


def _fit_huber_augmented(loss: LossSpec, penalty: PenaltySpec, data: Dataset,
                         cfg: SolverConfig, beta0: Optional[np.ndarray],
                         ) -> tuple[np.ndarray, int, float, np.ndarray]:
    lam_star = loss.scale / np.sqrt(data.n)
    aug = augment_huber(data, penalty.lam, lam_star)
    b_bar0 = np.zeros(data.p + data.n)
    if beta0 is not None:
        b_bar0[: data.p] = beta0
        # Optimal theta given beta0: soft-clip of the residuals.
        r0 = data.y - data.x @ beta0
        b_bar0[data.p:] = np.sign(r0) * np.maximum(np.abs(r0) - loss.scale, 0.0) / aug.aux_scale
    aug_data = Dataset(aug.design, aug.response)
    aug_penalty = L1Penalty(lam=penalty.lam)
    b_bar, iters, _, history = _fit_cd_square(aug_penalty, aug_data, cfg, b_bar0)
    beta, _, _ = aug.back_map(b_bar)
    # Report the gap of the original Huber problem (identical at the optimum).
    gap = kkt_gap(beta, loss, penalty, data, cfg.support_tol)
    # The history is the augmented objective, the one the solver descends; it
    # upper-bounds the Huber objective and matches it once theta is optimal.
    return beta, iters, float(gap), history


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _resolve_algorithm(loss: LossSpec, penalty: PenaltySpec, cfg: SolverConfig) -> str:
    algo = cfg.algorithm
    if algo == "auto":
        if loss.kind == "square" and penalty.kind == "l1":
            return "coordinate_descent"
        if loss.kind == "huber" and penalty.kind == "l1" and penalty.lam > 0:
            return "augmented_lasso"
        return "fista"
    if algo == "coordinate_descent":
        if loss.kind != "square" or penalty.kind not in ("none", "l1", "elastic_net"):
            raise UnsupportedPair(
                f"coordinate descent supports the square loss with separable penalties, "
                f"got {loss.kind}+{penalty.kind}"
            )
    if algo == "augmented_lasso":
        if loss.kind != "huber" or penalty.kind != "l1" or penalty.lam <= 0:
            raise UnsupportedPair(
                f"the augmented Lasso route requires huber+l1 with lam > 0, "
                f"got {loss.kind}+{penalty.kind}"
            )
    return algo


def fit(loss: LossSpec, penalty: PenaltySpec, data: Dataset,
        cfg: Optional[SolverConfig] = None, beta0: Optional[np.ndarray] = None) -> FitResult:
    """Compute the penalized M-estimator with a certified KKT gap.

    Returns converged=False (rather than raising) when the iteration budget
    runs out; use :func:`ensure_converged` where a hard failure is wanted.
    ``beta0`` warm-starts the iterative solvers.
    """
    cfg = cfg or SolverConfig()
    if penalty.kind == "nuclear" and penalty.rows * penalty.cols != data.p:
        raise DimensionMismatch(
            f"nuclear penalty shape {penalty.rows}x{penalty.cols} != p={data.p}"
        )
    if beta0 is not None:
        beta0 = np.asarray(beta0, dtype=float)
        if beta0.shape != (data.p,):
            raise DimensionMismatch(f"beta0 shape {beta0.shape} != ({data.p},)")

    algo = _resolve_algorithm(loss, penalty, cfg)
    if algo == "coordinate_descent":
        beta, iters, gap, history = _fit_cd_square(penalty, data, cfg, beta0)
    elif algo == "augmented_lasso":
        beta, iters, gap, history = _fit_huber_augmented(loss, penalty, data, cfg, beta0)
    else:
        beta, iters, gap, history = _fit_fista(loss, penalty, data, cfg, beta0)

    residual = data.y - data.x @ beta
    _, psi_hat, psi_prime_hat = loss_eval_vec(loss, residual)
    tol = resolve_support_tol(cfg, beta)
    active = np.flatnonzero(np.abs(beta) > tol)
    inliers = np.flatnonzero(psi_prime_hat > 0.0)
    return FitResult(
        beta_hat=beta,
        psi_hat=psi_hat,
        psi_prime_hat=psi_prime_hat,
        active_set=active,
        inlier_set=inliers,
        kkt_gap=float(gap),
        iterations=int(iters),
        converged=bool(gap <= cfg.kkt_tol),
        objective=objective_value(beta, loss, penalty, data),
        objective_history=history,
    )


def ensure_converged(result: FitResult) -> FitResult:
    """Raise :class:`NotConverged` (carrying the iterate) unless converged."""
    from .errors import NotConverged

    if not result.converged:
        raise NotConverged(result)
    return result
