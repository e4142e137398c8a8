"""Built-in invariant suites behind the `selftest` CLI command.

Each check is quick and seeded; the full battery takes a few seconds.  The
pytest suite covers the same ground (and more) with finer assertions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset, GaussianNoise, gen_dataset
from .estimators import SigmaOps, square_loss_estimates
from .jacobians import closed_form_factors, fd_jacobian
from .losses import LossSpec, loss_eval_vec
from .penalties import ElasticNetPenalty, L1Penalty, prox_penalty
from .rng import stream
from .solvers import SolverConfig, fit


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, ok: bool, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(ok), detail=detail)


def _loss_checks() -> list[CheckResult]:
    out = []
    for kind in ("square", "huber", "smooth_huber0", "smooth_huber1"):
        for scale in (0.5, 1.0, 3.0):
            loss = LossSpec(kind=kind, scale=scale)
            u = np.linspace(-10 * scale, 10 * scale, 10_001)
            _, psi, dpsi = loss_eval_vec(loss, u)
            du = u[1] - u[0]
            lipschitz = np.max(np.abs(np.diff(psi))) <= du * (1 + 1e-9)
            monotone = np.all(np.diff(psi) >= -1e-12)
            in_range = np.all((dpsi >= 0) & (dpsi <= 1 + 1e-12))
            ok = lipschitz and monotone and in_range
            out.append(_check(f"loss[{kind},scale={scale}] psi 1-Lipschitz/monotone", ok))
            if not ok:
                break
    return out


def _prox_checks() -> list[CheckResult]:
    rng = stream(2024, 9, 0)
    v = rng.standard_normal(40) * 3
    pen = ElasticNetPenalty(lam=0.7, mu=0.4)
    z = prox_penalty(pen, v, 0.9)
    # Prox optimality: the objective at z beats nearby perturbations.
    def obj(w):
        return float(np.sum((w - v) ** 2) / (2 * 0.9) + pen.mu * w @ w / 2 + pen.lam * np.abs(w).sum())
    base = obj(z)
    ok = all(obj(z + 1e-4 * rng.standard_normal(40)) >= base - 1e-12 for _ in range(20))
    return [_check("prox[elastic_net] local optimality", ok, f"objective {base:.6f}")]


def _make_instance(seed: int, n: int = 60, p: int = 80) -> tuple[Dataset, np.ndarray]:
    rng = stream(seed, 9, 1)
    beta = np.zeros(p)
    beta[:5] = 1.0
    data, _ = gen_dataset(n, np.eye(p), beta, GaussianNoise(sigma=1.0), rng)
    return data, beta


def _solver_checks() -> list[CheckResult]:
    out = []
    data, _ = _make_instance(11)
    lam = 0.1 * float(np.max(np.abs(data.x.T @ data.y)) / data.n)
    for label, loss, penalty in (
        ("square+l1", LossSpec(kind="square"), L1Penalty(lam=lam)),
        ("square+en", LossSpec(kind="square"), ElasticNetPenalty(lam=lam, mu=0.3)),
        ("huber+l1", LossSpec(kind="huber", scale=2.0), L1Penalty(lam=lam)),
    ):
        fr = fit(loss, penalty, data)
        out.append(_check(
            f"solver[{label}] KKT gap <= tol", fr.converged and fr.kkt_gap <= 1e-8,
            f"gap={fr.kkt_gap:.2e} iters={fr.iterations}",
        ))
    # Augmented-Lasso route agrees with a direct FISTA solve.
    loss = LossSpec(kind="huber", scale=2.0)
    pen = L1Penalty(lam=lam)
    cfg_direct = SolverConfig(algorithm="fista", kkt_tol=1e-10)
    a = fit(loss, pen, data)
    b = fit(loss, pen, data, cfg_direct)
    dist = float(np.max(np.abs(a.beta_hat - b.beta_hat)))
    out.append(_check("solver[huber+l1] augmented == fista", dist <= 1e-6, f"sup dist {dist:.2e}"))
    return out


def _factor_checks() -> list[CheckResult]:
    out = []
    data, _ = _make_instance(13, n=50, p=30)
    loss = LossSpec(kind="huber", scale=1.5)
    pen = L1Penalty(lam=0.05)
    fr = fit(loss, pen, data)
    factors = closed_form_factors(fr, loss, pen, data)
    out.append(_check(
        "factors df_hat <= |inliers|, trace in [0, n]",
        factors.df_hat <= fr.n_inliers + 1e-6 and -1e-6 <= factors.trace_dpsi <= data.n + 1e-6,
        f"df={factors.df_hat} tr={factors.trace_dpsi} inliers={fr.n_inliers}",
    ))
    # Elastic-net closed form vs central differences.
    loss2 = LossSpec(kind="square")
    pen2 = ElasticNetPenalty(lam=0.08, mu=0.25)
    cfg = SolverConfig(kkt_tol=1e-12)
    fr2 = fit(loss2, pen2, data, cfg)
    cf = closed_form_factors(fr2, loss2, pen2, data)

    def field(y):
        return fit(loss2, pen2, data.with_response(y), cfg, beta0=fr2.beta_hat).psi_hat

    tr_fd = float(np.trace(fd_jacobian(field, data.y)))
    out.append(_check(
        "factors elastic-net closed form vs fd trace",
        abs(tr_fd - cf.trace_dpsi) <= 1e-3,
        f"fd={tr_fd:.6f} closed={cf.trace_dpsi:.6f}",
    ))
    return out


def _estimator_checks() -> list[CheckResult]:
    data, _ = _make_instance(17, n=80, p=40)
    loss = LossSpec(kind="square")
    pen = ElasticNetPenalty(lam=0.05, mu=0.2)
    fr = fit(loss, pen, data)
    factors = closed_form_factors(fr, loss, pen, data)
    report = square_loss_estimates(fr, data, SigmaOps(np.eye(data.p)), factors)
    lhs = report.tau2_hat
    rhs = report.r_hat + report.sigma2_hat
    rel = abs(lhs - rhs) / max(1e-30, abs(lhs))
    return [_check("estimators tau2 == r_hat + sigma2", rel <= 1e-10, f"rel err {rel:.2e}")]


def run_selftest() -> list[CheckResult]:
    checks: list[CheckResult] = []
    checks += _loss_checks()
    checks += _prox_checks()
    checks += _solver_checks()
    checks += _factor_checks()
    checks += _estimator_checks()
    return checks
