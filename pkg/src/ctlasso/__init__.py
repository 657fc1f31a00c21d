"""Covariance-thresholded lasso: L1-penalized regression over a sparsified
sample covariance matrix, with baselines, cross-validation, theory
diagnostics, and a reproducible simulation harness."""

from .covariance import (
    CovMatrix,
    StandardizedDesign,
    ThresholdKind,
    ThresholdRule,
    apply_threshold,
    min_eigenvalue,
    sample_covariance,
    standardize,
)
from .diagnostics import (
    DiagnosticsReport,
    build_report,
    irrepresentable_index,
    sign_recovery_certificate,
    recommended_nu,
    sparsity_degrees,
)
from .estimators import (
    EstimatorSpec,
    Method,
    adaptive_lasso_path,
    elastic_net_path,
    fit_path,
    ust_fit,
    ust_path,
)
from .metrics import (
    SelectionMetrics,
    bootstrap_se_of_median,
    rpe,
    selection_metrics,
    sign_agreement,
)
from .model_selection import (
    BestPossible,
    CvCurve,
    CvSelection,
    CvVariant,
    best_possible_selection,
    default_lambda_grid,
    grid_search_cv,
    kfold_cv,
    select_lambda,
    sis_screen,
)
from .path import (
    Breakpoint,
    KktReport,
    SolutionPath,
    Termination,
    coefficients_at,
    ct_lars,
    kkt_check,
    oracle_solve,
    residual_correlations,
    solve_path_gram,
)
from .simulation import (
    CvOptions,
    ExperimentResult,
    MethodAggregate,
    ReplicationResult,
    SigmaKind,
    SigmaSpec,
    SimulationDesign,
    Tuning,
    gen_data,
    make_sigma,
    preset,
    run_experiment,
    snr,
)

__version__ = "0.1.0"

__all__ = [
    "Breakpoint",
    "BestPossible",
    "CovMatrix",
    "CvCurve",
    "CvOptions",
    "CvSelection",
    "CvVariant",
    "DiagnosticsReport",
    "EstimatorSpec",
    "ExperimentResult",
    "KktReport",
    "Method",
    "MethodAggregate",
    "ReplicationResult",
    "SelectionMetrics",
    "SigmaKind",
    "SigmaSpec",
    "SimulationDesign",
    "SolutionPath",
    "StandardizedDesign",
    "Termination",
    "ThresholdKind",
    "ThresholdRule",
    "Tuning",
    "adaptive_lasso_path",
    "apply_threshold",
    "best_possible_selection",
    "bootstrap_se_of_median",
    "build_report",
    "coefficients_at",
    "ct_lars",
    "default_lambda_grid",
    "elastic_net_path",
    "fit_path",
    "gen_data",
    "grid_search_cv",
    "irrepresentable_index",
    "kfold_cv",
    "kkt_check",
    "sign_recovery_certificate",
    "make_sigma",
    "min_eigenvalue",
    "oracle_solve",
    "preset",
    "recommended_nu",
    "residual_correlations",
    "rpe",
    "run_experiment",
    "sample_covariance",
    "select_lambda",
    "selection_metrics",
    "sign_agreement",
    "sis_screen",
    "snr",
    "solve_path_gram",
    "sparsity_degrees",
    "standardize",
    "ust_fit",
    "ust_path",
]
