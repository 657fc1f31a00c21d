"""Random-design generators, named experiment presets, and the replication harness.

Designs draw rows of X i.i.d. from N(0, Sigma) and responses from
``y = X beta* + sigma * eps``.  Per-replication RNG streams are derived by
counter-based seed splitting, so replications can run in parallel and the
whole experiment is a pure function of (design, seed, method list).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from joblib import Parallel, delayed

from .covariance import CovMatrix, StandardizedDesign, ThresholdRule, standardize
from .estimators import EstimatorSpec, Method, fit_path
from .exceptions import CholeskyFailure, InvalidRho, NotPsd
from .metrics import SelectionMetrics, bootstrap_se_of_median, rpe, selection_metrics
from .model_selection import (
    DEFAULT_FOLDS,
    DEFAULT_GAMMA_GRID,
    DEFAULT_LAMBDA2_GRID,
    DEFAULT_NU_GRID,
    CvVariant,
    best_possible_selection,
    default_lambda_grid,
    expand_cells,
    grid_search_cv,
)
from .path import coefficients_at


class SigmaKind(str, Enum):
    IDENTITY = "identity"
    AR = "ar"
    CONSTANT = "constant"
    GROUPED = "grouped"


@dataclass(frozen=True)
class SigmaSpec:
    kind: SigmaKind
    rho: float = 0.0

    @classmethod
    def identity(cls) -> "SigmaSpec":
        return cls(SigmaKind.IDENTITY)

    @classmethod
    def ar(cls, rho: float) -> "SigmaSpec":
        return cls(SigmaKind.AR, rho=rho)

    @classmethod
    def constant(cls, rho: float) -> "SigmaSpec":
        return cls(SigmaKind.CONSTANT, rho=rho)

    @classmethod
    def grouped(cls) -> "SigmaSpec":
        return cls(SigmaKind.GROUPED)


# Grouped structure: two latent factors give within-group correlations of
# 0.15 on variables 1-10 and 0.95 on variables 11-15 (1-based), zero elsewhere.
_GROUPED_BLOCKS = (((0, 10), 0.15), ((10, 15), 0.95))


@dataclass(frozen=True)
class SimulationDesign:
    p: int
    n: int
    beta_star: np.ndarray
    sigma_spec: SigmaSpec
    sigma_noise: float
    replications: int
    seed: int
    name: str = "custom"

    def __post_init__(self):
        if self.sigma_noise <= 0:
            raise ValueError("sigma_noise must be positive")
        beta = np.asarray(self.beta_star, dtype=float)
        if beta.shape != (self.p,):
            raise ValueError(f"beta_star must have length p={self.p}")
        object.__setattr__(self, "beta_star", beta)


def make_sigma(spec: SigmaSpec, p: int) -> CovMatrix:
    """Population correlation matrix for a named structure."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if spec.kind is SigmaKind.IDENTITY:
        return CovMatrix(np.eye(p))
    if spec.kind is SigmaKind.AR:
        if abs(spec.rho) >= 1:
            raise InvalidRho(f"|rho| must be < 1, got {spec.rho}")
        idx = np.arange(p)
        return CovMatrix(spec.rho ** np.abs(idx[:, None] - idx[None, :]))
    if spec.kind is SigmaKind.CONSTANT:
        if abs(spec.rho) >= 1:
            raise InvalidRho(f"|rho| must be < 1, got {spec.rho}")
        if spec.rho < -1.0 / (p - 1):
            raise NotPsd(f"constant rho={spec.rho} is not PSD for p={p}")
        m = np.full((p, p), spec.rho)
        np.fill_diagonal(m, 1.0)
        return CovMatrix(m)
    if spec.kind is SigmaKind.GROUPED:
        if p < 15:
            raise ValueError("grouped structure needs p >= 15")
        m = np.eye(p)
        for (lo, hi), rho in _GROUPED_BLOCKS:
            block = slice(lo, hi)
            sub = np.full((hi - lo, hi - lo), rho)
            np.fill_diagonal(sub, 1.0)
            m[block, block] = sub
        return CovMatrix(m)
    raise ValueError(f"unknown sigma kind {spec.kind}")


def _rep_rng(seed: int, rep_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, rep_index])


def gen_data(
    design: SimulationDesign,
    rep_index: int,
    *,
    use_latent_factors: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw one replication's (X, y).

    X rows are i.i.d. N(0, Sigma) via the Cholesky factor of Sigma.  For the
    grouped structure, ``use_latent_factors`` instead builds X from the
    explicit shared-factor recipe (factor plus independent noise, normalized
    to unit variance), which induces the same law.
    """
    rng = _rep_rng(design.seed, rep_index)
    n, p = design.n, design.p
    if use_latent_factors:
        if design.sigma_spec.kind is not SigmaKind.GROUPED:
            raise ValueError("latent-factor generation only applies to the grouped structure")
        x = rng.standard_normal((n, p))
        for (lo, hi), rho in _GROUPED_BLOCKS:
            z = rng.standard_normal((n, 1))
            noise_sd = np.sqrt((1.0 - rho) / rho)
            x[:, lo:hi] = (z + noise_sd * x[:, lo:hi]) / np.sqrt(1.0 + noise_sd**2)
    else:
        sigma = make_sigma(design.sigma_spec, p)
        try:
            chol = np.linalg.cholesky(sigma.entries)
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure(f"population covariance is not PD: {exc}") from exc
        x = rng.standard_normal((n, p)) @ chol.T
    y = x @ design.beta_star + design.sigma_noise * rng.standard_normal(n)
    return x, y


def snr(beta_star: np.ndarray, sigma_pop: CovMatrix, sigma_noise: float) -> float:
    """Signal-to-noise ratio ``beta' Sigma beta / sigma^2``."""
    if sigma_noise <= 0:
        raise ValueError("sigma_noise must be positive")
    beta = np.asarray(beta_star, dtype=float)
    return float(beta @ sigma_pop.entries @ beta) / sigma_noise**2


def preset(name: str, *, n: int, replications: int = 200, seed: int = 0) -> SimulationDesign:
    """Named experiment designs.

    ``intro``: p=40, first 10 coefficients equal 2, identity covariance, and
    noise sd sqrt(40) for a signal-to-noise ratio of exactly 1.  ``ex1``:
    autocorrelated (AR 0.5) covariance.  ``ex2``: constant 0.95 correlation.
    ``ex3``: grouped factors.
    """
    if name == "intro":
        beta = np.zeros(40)
        beta[:10] = 2.0
        return SimulationDesign(
            p=40, n=n, beta_star=beta, sigma_spec=SigmaSpec.identity(),
            sigma_noise=float(np.sqrt(40.0)), replications=replications, seed=seed,
            name=name,
        )
    if name == "ex1":
        beta = np.zeros(100)
        beta[0:5] = 3.0
        beta[10:15] = 1.5
        return SimulationDesign(
            p=100, n=n, beta_star=beta, sigma_spec=SigmaSpec.ar(0.5),
            sigma_noise=9.0, replications=replications, seed=seed, name=name,
        )
    if name == "ex2":
        beta = np.zeros(100)
        beta[10:20] = 3.0
        beta[30:40] = 1.5
        return SimulationDesign(
            p=100, n=n, beta_star=beta, sigma_spec=SigmaSpec.constant(0.95),
            sigma_noise=15.0, replications=replications, seed=seed, name=name,
        )
    if name == "ex3":
        beta = np.zeros(100)
        beta[0:10] = [3.0, 3.0, 2.5, 2.5, 2.0, 2.0, 1.5, 1.5, 1.0, 1.0]
        return SimulationDesign(
            p=100, n=n, beta_star=beta, sigma_spec=SigmaSpec.grouped(),
            sigma_noise=15.0, replications=replications, seed=seed, name=name,
        )
    raise ValueError(f"unknown preset {name!r} (expected intro, ex1, ex2, or ex3)")


class Tuning(str, Enum):
    BEST_POSSIBLE = "best-possible"
    CROSS_VALIDATION = "cv"


@dataclass(frozen=True)
class CvOptions:
    k: int = DEFAULT_FOLDS
    variant: CvVariant = CvVariant.AUTO
    nu_grid: tuple = DEFAULT_NU_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    lambda2_grid: tuple = DEFAULT_LAMBDA2_GRID
    n_lambdas: int = 100


@dataclass(frozen=True)
class ReplicationResult:
    method: str
    metrics: SelectionMetrics
    rpe: float
    selected_count: int
    rule: ThresholdRule | None
    lam: float
    gamma_weights: float | None = None


@dataclass(frozen=True)
class MethodAggregate:
    method: str
    reps: int
    median_g: float
    se_g: float
    median_rpe: float
    se_rpe: float
    median_tp: float
    median_fp: float
    median_sensitivity: float
    median_specificity: float
    median_selected: float


@dataclass(frozen=True)
class ExperimentResult:
    design: SimulationDesign
    tuning: Tuning
    aggregates: list[MethodAggregate]
    replications: list[list[ReplicationResult]] = field(repr=False, default_factory=list)


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("CT_LASSO_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _fold_seed(seed: int, rep_index: int) -> int:
    return int(np.random.SeedSequence([seed, rep_index, 7]).generate_state(1)[0])


def _run_replication(
    design: SimulationDesign,
    methods: list[EstimatorSpec],
    tuning: Tuning,
    cv_opts: CvOptions,
    sigma_pop: CovMatrix,
    rep_index: int,
) -> list[ReplicationResult]:
    raw_x, raw_y = gen_data(design, rep_index)
    std = standardize(raw_x, raw_y)
    results = []
    for spec in methods:
        if tuning is Tuning.BEST_POSSIBLE:
            cells = expand_cells(spec, cv_opts.nu_grid, cv_opts.gamma_grid, cv_opts.lambda2_grid)
            paths = [fit_path(std, cell) for cell in cells]
            best = best_possible_selection(paths, design.beta_star)
            beta_std = coefficients_at(paths[best.path_index], best.lam, clamp=True)
            rule, lam = best.rule, best.lam
            gamma_w = (
                cells[best.path_index].gamma_weights
                if spec.method is Method.ADAPTIVE_LASSO
                else None
            )
        else:
            sel = grid_search_cv(
                std, spec,
                nu_grid=cv_opts.nu_grid,
                gamma_grid=cv_opts.gamma_grid,
                lambda2_grid=cv_opts.lambda2_grid,
                lambdas=default_lambda_grid(std, cv_opts.n_lambdas),
                k=cv_opts.k,
                variant=cv_opts.variant,
                seed=_fold_seed(design.seed, rep_index),
            )
            if spec.method is Method.ADAPTIVE_LASSO:
                bound = EstimatorSpec(spec.method, gamma_weights=sel.gamma_weights)
            elif spec.method is Method.UST:
                bound = spec
            else:
                bound = EstimatorSpec(spec.method, rule=sel.rule_hat)
            pat = fit_path(std, bound)
            beta_std = coefficients_at(pat, sel.lambda_hat, clamp=True)
            rule, lam, gamma_w = sel.rule_hat, sel.lambda_hat, sel.gamma_weights

        beta_raw = beta_std / std.column_scales
        m = selection_metrics(beta_raw, design.beta_star)
        results.append(
            ReplicationResult(
                method=spec.label(),
                metrics=m,
                rpe=rpe(beta_raw, design.beta_star, sigma_pop, design.sigma_noise),
                selected_count=m.tp + m.fp,
                rule=rule,
                lam=lam,
                gamma_weights=gamma_w,
            )
        )
    return results


def run_experiment(
    design: SimulationDesign,
    methods: list[EstimatorSpec],
    tuning: Tuning = Tuning.BEST_POSSIBLE,
    cv_opts: CvOptions | None = None,
    *,
    workers: int | None = None,
    keep_replications: bool = False,
    bootstrap_b: int = 500,
) -> ExperimentResult:
    """Replicated comparison of methods on one simulated design.

    Per replication: draw data, standardize, fit every method's path family,
    tune (ex post facto against the truth, or by grid-search cross-validation),
    and score support recovery and relative prediction error.  Aggregates are
    medians across replications with bootstrap standard errors for median G
    and median RPE.
    """
    cv_opts = cv_opts or CvOptions()
    sigma_pop = make_sigma(design.sigma_spec, design.p)
    n_jobs = resolve_workers(workers)

    if n_jobs == 1 or design.replications == 1:
        per_rep = [
            _run_replication(design, methods, tuning, cv_opts, sigma_pop, r)
            for r in range(design.replications)
        ]
    else:
        per_rep = Parallel(n_jobs=n_jobs)(
            delayed(_run_replication)(design, methods, tuning, cv_opts, sigma_pop, r)
            for r in range(design.replications)
        )

    aggregates = []
    for i, spec in enumerate(methods):
        rows = [rep[i] for rep in per_rep]
        g = np.array([r.metrics.g for r in rows])
        rp = np.array([r.rpe for r in rows])
        boot_seed_g = int(np.random.SeedSequence([design.seed, 101, i]).generate_state(1)[0])
        boot_seed_r = int(np.random.SeedSequence([design.seed, 102, i]).generate_state(1)[0])
        aggregates.append(
            MethodAggregate(
                method=spec.label(),
                reps=design.replications,
                median_g=float(np.median(g)),
                se_g=bootstrap_se_of_median(g, bootstrap_b, boot_seed_g),
                median_rpe=float(np.median(rp)),
                se_rpe=bootstrap_se_of_median(rp, bootstrap_b, boot_seed_r),
                median_tp=float(np.median([r.metrics.tp for r in rows])),
                median_fp=float(np.median([r.metrics.fp for r in rows])),
                median_sensitivity=float(np.median([r.metrics.sensitivity for r in rows])),
                median_specificity=float(np.median([r.metrics.specificity for r in rows])),
                median_selected=float(np.median([r.selected_count for r in rows])),
            )
        )
    return ExperimentResult(
        design=design,
        tuning=tuning,
        aggregates=aggregates,
        replications=per_rep if keep_replications else [],
    )
