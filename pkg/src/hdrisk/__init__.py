"""Penalized M-estimators for high-dimensional regression with data-driven
out-of-sample error, generalization error and noise-level estimates."""

from .datagen import (
    ContaminatedNoise,
    CovarianceSpec,
    Dataset,
    GaussianNoise,
    GroundTruth,
    IdentityCovariance,
    LowRankSignal,
    NoiseSpec,
    ScaledWishartCovariance,
    SignalSpec,
    SparseFlatSignal,
    StudentTNoise,
    gen_covariance,
    gen_dataset,
    gen_signal,
    oos_error,
)
from .errors import (
    DegenerateFactor,
    DimensionMismatch,
    FieldEvaluationFailure,
    HdriskError,
    NoClosedForm,
    NonPositiveDefinite,
    NotConverged,
    SvdFailure,
    UnsupportedPair,
)
from .estimators import (
    RiskReport,
    SigmaOps,
    hat_r,
    sigma_inv_sqrt_apply,
    square_loss_estimates,
    sure,
    tau_squared,
)
from .harness import (
    ExperimentConfig,
    GridSpec,
    ResultRow,
    RESULT_COLUMNS,
    paper_scale_config,
    run_experiment,
    write_rows_csv,
)
from .jacobians import JacobianFactors, closed_form_factors, fd_jacobian, mc_divergence, mc_factors
from .losses import LossSpec, huber_loss, loss_eval, loss_eval_vec, square_loss
from .penalties import (
    ElasticNetPenalty,
    L1Penalty,
    NoPenalty,
    NuclearPenalty,
    PenaltySpec,
    prox_penalty,
)
from .solvers import FitResult, SolverConfig, augment_huber, ensure_converged, fit, kkt_gap

__version__ = "0.1.0"
