"""Shared fixtures and instance builders for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from hdrisk.datagen import Dataset, GaussianNoise, gen_dataset
from hdrisk.rng import stream
from hdrisk.solvers import SolverConfig, fit

# Tight solver tolerance for finite-difference work: solver noise must sit
# far below the h = 1e-5 perturbation scale.
FD_CFG = SolverConfig(kkt_tol=1e-12)


def gaussian_instance(seed: int, n: int, p: int, s: int = 5, amplitude: float = 1.0,
                      sigma: float = 1.0, sigma_cov: np.ndarray | None = None):
    """Random Gaussian-design instance with a flat sparse signal."""
    rng = stream(seed, 42)
    beta = np.zeros(p)
    beta[:s] = amplitude
    cov = np.eye(p) if sigma_cov is None else sigma_cov
    data, truth = gen_dataset(n, cov, beta, GaussianNoise(sigma=sigma), rng)
    return data, truth


def lambda_max(data: Dataset) -> float:
    """Smallest l1 level that zeroes the lasso solution."""
    return float(np.max(np.abs(data.x.T @ data.y)) / data.n)


def support_is_stable(loss, penalty, data, fr, h: float, cfg=FD_CFG,
                      probes: int | None = None) -> bool:
    """True when the active and inlier sets survive +-h bumps of every y_i.

    The finite-difference Jacobian oracle is only meaningful where the fitted
    sets are locally constant; unstable draws get resampled by callers.
    """
    base_active = set(fr.active_set.tolist())
    base_inlier = set(fr.inlier_set.tolist())
    idx = range(data.n) if probes is None else range(min(probes, data.n))
    for i in idx:
        for sign in (+1.0, -1.0):
            y2 = data.y.copy()
            y2[i] += sign * h
            fr2 = fit(loss, penalty, data.with_response(y2), cfg, beta0=fr.beta_hat)
            if set(fr2.active_set.tolist()) != base_active:
                return False
            if set(fr2.inlier_set.tolist()) != base_inlier:
                return False
    return True


def stable_instance(loss, penalty_of, seed0: int, n: int, p: int, h: float,
                    tries: int = 25, cfg=FD_CFG, **inst_kw):
    """Resample until the fitted sets are stable across +-h (test-only policy)."""
    for t in range(tries):
        data, truth = gaussian_instance(seed0 + 1000 * t, n, p, **inst_kw)
        penalty = penalty_of(data)
        fr = fit(loss, penalty, data, cfg)
        if fr.converged and support_is_stable(loss, penalty, data, fr, h, cfg):
            return data, truth, penalty, fr
    pytest.fail(f"no stable instance found in {tries} tries (seed0={seed0})")
