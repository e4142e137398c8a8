"""Loss functions rho with derivative psi and a.e. second derivative psi'.

Every loss here is convex, even, has psi = rho' nondecreasing and 1-Lipschitz,
and psi' valued in [0, 1].  A scaled loss evaluates
``rho(u) = scale**2 * rho_base(u / scale)`` so the Lipschitz constant of psi
is unchanged by scaling.  The square loss is scale-invariant under this rule
and ignores ``scale``.
"""
from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

LossKind = Literal["square", "huber", "smooth_huber0", "smooth_huber1"]


class LossSpec(BaseModel):
    """Which loss to use and its scale (the robustness elbow location)."""

    model_config = ConfigDict(frozen=True)

    kind: LossKind = "square"
    scale: float = Field(default=1.0, gt=0.0)

    def inlier_halfwidth(self) -> float:
        """Half-width of the region where psi' > 0 (inf for the square loss)."""
        if self.kind == "square":
            return float("inf")
        if self.kind == "huber":
            return self.scale
        return 2.0 * self.scale


def square_loss() -> LossSpec:
    return LossSpec(kind="square")


def huber_loss(scale: float = 1.0) -> LossSpec:
    return LossSpec(kind="huber", scale=scale)


def _base_eval(kind: LossKind, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, psi, psi') of the unit-scale loss at v >= 0."""
    if kind == "square":
        return 0.5 * v * v, v.copy(), np.ones_like(v)
    if kind == "huber":
        # psi' = 1 on the closed set |v| <= 1 so the inlier set is closed.
        inner = v <= 1.0
        rho = np.where(inner, 0.5 * v * v, v - 0.5)
        psi = np.where(inner, v, 1.0)
        dpsi = np.where(inner, 1.0, 0.0)
        return rho, psi, dpsi
    # Smoothstep approximations of the Huber psi': linear (order 0) and cubic
    # (order 1) ramps on [1, 2], constant outside.
    lo = v <= 1.0
    hi = v >= 2.0
    vm = np.clip(v, 1.0, 2.0)  # keeps the polynomial branch bounded
    if kind == "smooth_huber0":
        rho_mid = 1.0 / 6.0 - vm / 2.0 + vm**2 - vm**3 / 6.0
        psi_mid = -0.5 + 2.0 * vm - 0.5 * vm**2
        dpsi_mid = 2.0 - vm
        rho_hi = -7.0 / 6.0 + 1.5 * v
    elif kind == "smooth_huber1":
        rho_mid = vm**5 / 10.0 - 0.75 * vm**4 + 2.0 * vm**3 - 2.0 * vm**2 + 1.5 * vm - 0.35
        psi_mid = 1.5 + 0.5 * (vm - 2.0) ** 3 * vm
        dpsi_mid = 2.0 * vm**3 - 9.0 * vm**2 + 12.0 * vm - 4.0
        rho_hi = 37.0 / 20.0 + 1.5 * (v - 2.0)
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    rho = np.where(lo, 0.5 * v * v, np.where(hi, rho_hi, rho_mid))
    psi = np.where(lo, v, np.where(hi, 1.5, psi_mid))
    dpsi = np.where(lo, 1.0, np.where(hi, 0.0, dpsi_mid))
    return rho, psi, dpsi


def loss_eval_vec(loss: LossSpec, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Componentwise (rho(u), psi(u), psi'(u)).

    Values for u < 0 follow from symmetry: rho even, psi odd, psi' even.
    """
    u = np.asarray(u, dtype=float)
    s = loss.scale
    v = np.abs(u) / s
    rho, psi, dpsi = _base_eval(loss.kind, v)
    return s * s * rho, np.sign(u) * s * psi, dpsi


def loss_eval(loss: LossSpec, u: float) -> tuple[float, float, float]:
    """(rho(u), psi(u), psi'(u)) at a single point."""
    rho, psi, dpsi = loss_eval_vec(loss, np.asarray([u], dtype=float))
    return float(rho[0]), float(psi[0]), float(dpsi[0])


def psi_vec(loss: LossSpec, u: np.ndarray) -> np.ndarray:
    """psi(u) componentwise (cheaper than loss_eval_vec when only psi is needed)."""
    u = np.asarray(u, dtype=float)
    if loss.kind == "square":
        return u.astype(float, copy=True)
    s = loss.scale
    if loss.kind == "huber":
        return np.clip(u, -s, s)
    _, psi, _ = loss_eval_vec(loss, u)
    return psi


def rho_sum(loss: LossSpec, u: np.ndarray) -> float:
    """sum_i rho(u_i)."""
    rho, _, _ = loss_eval_vec(loss, u)
    return float(np.sum(rho))
