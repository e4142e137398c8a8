"""Exception hierarchy shared across the package."""


class HdriskError(Exception):
    """Base class for all hdrisk errors."""


class DimensionMismatch(HdriskError):
    """Operands have inconsistent shapes."""


class NonPositiveDefinite(HdriskError):
    """A covariance matrix is not (numerically) positive definite."""


class UnsupportedPair(HdriskError):
    """The requested (loss, penalty, algorithm) combination is not supported."""


class NotConverged(HdriskError):
    """Solver stopped before reaching the requested KKT tolerance.

    Carries the last iterate so callers can inspect or salvage it.
    """

    def __init__(self, fit, message: str = ""):
        self.fit = fit
        gap = getattr(fit, "kkt_gap", float("nan"))
        super().__init__(message or f"solver did not converge (kkt_gap={gap:.3e})")


class NoClosedForm(HdriskError):
    """No closed-form Jacobian factors for this (loss, penalty); use Monte Carlo."""


class DegenerateFactor(HdriskError):
    """The trace factor is exactly zero; the risk estimate is undefined."""


class FieldEvaluationFailure(HdriskError):
    """A vector-field evaluation failed (e.g. a perturbed solve did not converge)."""


class SvdFailure(HdriskError):
    """SVD failed, typically because of non-finite input."""
