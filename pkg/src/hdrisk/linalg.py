"""Small linear-algebra utilities shared by the data generator and estimators."""
from __future__ import annotations

import numpy as np

from .errors import NonPositiveDefinite

# Eigenvalues below EIG_RTOL * max(eig) mean the matrix is treated as singular;
# they are an error rather than being clamped.
EIG_RTOL = 1e-12


def psd_eigh(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric positive-definite matrix.

    Returns ``(eigenvalues, eigenvectors)`` and raises
    :class:`NonPositiveDefinite` if the matrix is not symmetric or has an
    eigenvalue below ``EIG_RTOL`` times the largest one.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise NonPositiveDefinite(f"expected a square matrix, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(sigma).max())):
        raise NonPositiveDefinite("matrix is not symmetric")
    w, v = np.linalg.eigh(sigma)
    if w[-1] <= 0 or w[0] <= EIG_RTOL * w[-1]:
        raise NonPositiveDefinite(f"minimum eigenvalue {w[0]:.3e} is not positive")
    return w, v


def sqrt_psd(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive-definite matrix."""
    w, v = psd_eigh(sigma)
    return (v * np.sqrt(w)) @ v.T


def op_norm(x: np.ndarray, iters: int = 50, tol: float = 1e-10) -> float:
    """Largest singular value of ``x`` by power iteration on the Gram matrix.

    Deterministic: the start vector comes from a fixed Philox stream, so the
    same ``x`` always yields the same estimate.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    # Iterate on the smaller Gram matrix.
    gram_on_cols = x.shape[1] <= x.shape[0]
    dim = x.shape[1] if gram_on_cols else x.shape[0]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(0x9E3779B9)))
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        if gram_on_cols:
            w = x.T @ (x @ v)
        else:
            w = x @ (x.T @ v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= tol * max(1.0, lam_new):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(lam))
