"""Convex penalties g(b) and their proximal maps."""
from __future__ import annotations

from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import DimensionMismatch, SvdFailure


class NoPenalty(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["none"] = "none"


class L1Penalty(BaseModel):
    """g(b) = lam * ||b||_1."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["l1"] = "l1"
    lam: float = Field(ge=0.0)


class ElasticNetPenalty(BaseModel):
    """g(b) = mu * ||b||^2 / 2 + lam * ||b||_1."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["elastic_net"] = "elastic_net"
    lam: float = Field(ge=0.0)
    mu: float = Field(ge=0.0)


class NuclearPenalty(BaseModel):
    """g(b) = lam * ||mat(b)||_nuclear with mat: R^p -> R^{rows x cols}."""

    model_config = ConfigDict(frozen=True)
    kind: Literal["nuclear"] = "nuclear"
    lam: float = Field(ge=0.0)
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)


PenaltySpec = Annotated[
    Union[NoPenalty, L1Penalty, ElasticNetPenalty, NuclearPenalty],
    Field(discriminator="kind"),
]


def as_matrix(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """mat(v): column-major reshape, the inverse of the usual vectorization."""
    v = np.asarray(v, dtype=float)
    if v.shape != (rows * cols,):
        raise DimensionMismatch(f"vector of length {v.shape} cannot fill {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def as_vector(m: np.ndarray) -> np.ndarray:
    return np.asarray(m, dtype=float).ravel(order="F")


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def penalty_value(penalty: PenaltySpec, b: np.ndarray) -> float:
    """g(b)."""
    b = np.asarray(b, dtype=float)
    if penalty.kind == "none":
        return 0.0
    if penalty.kind == "l1":
        return float(penalty.lam * np.abs(b).sum())
    if penalty.kind == "elastic_net":
        return float(penalty.mu * (b @ b) / 2.0 + penalty.lam * np.abs(b).sum())
    sv = np.linalg.svd(as_matrix(b, penalty.rows, penalty.cols), compute_uv=False)
    return float(penalty.lam * sv.sum())


def prox_penalty(penalty: PenaltySpec, v: np.ndarray, step: float) -> np.ndarray:
    """argmin_z ||z - v||^2 / (2 step) + g(z)."""
    if step <= 0:
        raise ValueError("step must be positive")
    v = np.asarray(v, dtype=float)
    if penalty.kind == "none":
        return v.copy()
    if penalty.kind == "l1":
        return soft_threshold(v, step * penalty.lam)
    if penalty.kind == "elastic_net":
        return soft_threshold(v, step * penalty.lam) / (1.0 + step * penalty.mu)
    m = as_matrix(v, penalty.rows, penalty.cols)
    if not np.all(np.isfinite(m)):
        raise SvdFailure("non-finite input to the nuclear-norm prox")
    try:
        u, sv, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - svd rarely fails on finite input
        raise SvdFailure(str(exc)) from exc
    sv = np.maximum(sv - step * penalty.lam, 0.0)
    return as_vector((u * sv) @ vt)
