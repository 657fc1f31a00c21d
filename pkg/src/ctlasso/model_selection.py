"""Cross-validation, grid search, ex-post-facto tuning, and SIS screening.

Cross-validation follows a modified one-standard-deviation rule: besides the
usual minimum-error selection (CV0) the curve can be walked toward smaller
lambda (CV-, admitting more variables) or larger lambda (CV+, fewer
variables) while the error stays within one fold standard deviation of the
minimum.  The automatic variant uses CV- when ``n/sqrt(p) < 5``, where
prediction-based selection tends to under-select, and CV0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .covariance import StandardizedDesign, ThresholdKind, ThresholdRule, standardize
from .estimators import EstimatorSpec, Method, fit_path
from .exceptions import TooFewSamples
from .metrics import selection_metrics
from .path import SolutionPath, coefficients_at

DEFAULT_NU_GRID = tuple(np.linspace(0.0, 1.0, 11)[:-1]) + (1.0 - 1e-6,)
DEFAULT_GAMMA_GRID = (0.0, 0.5, 1.0, 2.0)
DEFAULT_LAMBDA2_GRID = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_FOLDS = 5


class CvVariant(str, Enum):
    CV_MINUS = "CvMinus"
    CV_ZERO = "CvZero"
    CV_PLUS = "CvPlus"
    AUTO = "Auto"


@dataclass(frozen=True)
class CvCurve:
    lambdas: np.ndarray  # strictly decreasing
    mean_error: np.ndarray
    sd_error: np.ndarray  # standard deviation of the per-fold errors, per lambda
    folds: int

    def __post_init__(self):
        if np.any(np.diff(self.lambdas) >= 0):
            raise ValueError("lambdas must be strictly decreasing")
        if len(self.mean_error) != len(self.lambdas) or len(self.sd_error) != len(self.lambdas):
            raise ValueError("curve arrays must share a length")
        if np.any(self.sd_error < 0):
            raise ValueError("sd_error must be non-negative")


@dataclass(frozen=True)
class CvSelection:
    lambda_hat: float
    variant_used: CvVariant
    rule_hat: ThresholdRule | None
    diagnostics: dict
    gamma_weights: float | None = None


def default_lambda_grid(design: StandardizedDesign, num: int = 100) -> np.ndarray:
    """Log-spaced grid from lambda_max down to 1e-3 * lambda_max."""
    lam_max = float(np.max(np.abs(design.xty())))
    if lam_max == 0.0:
        return np.array([0.0])
    return np.geomspace(lam_max, 1e-3 * lam_max, num)


def fold_assignments(n: int, k: int, seed: int) -> np.ndarray:
    """Shuffled round-robin fold ids, deterministic in (n, k, seed)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = np.empty(n, dtype=int)
    folds[perm] = np.arange(n) % k
    return folds


def kfold_cv(
    design: StandardizedDesign,
    spec: EstimatorSpec,
    lambdas: Sequence[float],
    k: int,
    seed: int,
) -> CvCurve:
    """K-fold validation error curve for a fully-bound estimator.

    Each fold refit re-standardizes its training rows and transforms the
    held-out rows with the training means and scales, so no validation
    statistics leak into the fit.  Errors are mean squared prediction errors
    in the units of ``design.y``; ``sd_error`` is the dispersion of the k
    fold errors at each lambda (the width used by the one-standard-deviation
    selection rule).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if design.n < 2 * k:
        raise TooFewSamples(f"need n >= 2k = {2 * k}, got {design.n}")
    lambdas = np.asarray(lambdas, dtype=float)

    folds = fold_assignments(design.n, k, seed)
    errors = np.empty((k, len(lambdas)))
    for f in range(k):
        train = folds != f
        val = ~train
        tdesign = standardize(design.x[train], design.y[train])
        pat = fit_path(tdesign, spec, lambda_floor=float(np.min(lambdas)))
        xv = (design.x[val] - tdesign.column_means) / tdesign.column_scales
        yv = design.y[val]
        for i, lam in enumerate(lambdas):
            beta = coefficients_at(pat, lam, clamp=True)
            pred = tdesign.y_mean + xv @ beta
            errors[f, i] = float(np.mean((yv - pred) ** 2))

    mean_error = errors.mean(axis=0)
    sd_error = errors.std(axis=0, ddof=1)
    return CvCurve(lambdas=lambdas, mean_error=mean_error, sd_error=sd_error, folds=k)


def select_lambda(
    curve: CvCurve,
    variant: CvVariant,
    n: int,
    p: int,
) -> CvSelection:
    """Pick a lambda from a CV curve under the requested variant.

    CV0 takes the error minimizer.  CV- takes the smallest lambda at or below
    the minimizer whose error stays within one standard deviation of the
    minimum; CV+ the largest lambda at or above it under the same cap.  Auto
    resolves to CV- when ``n/sqrt(p) < 5`` and to CV0 otherwise.
    """
    resolved = variant
    if variant is CvVariant.AUTO:
        resolved = CvVariant.CV_MINUS if n / np.sqrt(p) < 5.0 else CvVariant.CV_ZERO

    min_index = int(np.argmin(curve.mean_error))
    min_error = float(curve.mean_error[min_index])
    threshold = min_error + float(curve.sd_error[min_index])

    if resolved is CvVariant.CV_ZERO:
        chosen = min_index
    elif resolved is CvVariant.CV_MINUS:
        eligible = np.flatnonzero(curve.mean_error[min_index:] <= threshold) + min_index
        chosen = int(eligible[-1])
    else:
        eligible = np.flatnonzero(curve.mean_error[: min_index + 1] <= threshold)
        chosen = int(eligible[0])

    return CvSelection(
        lambda_hat=float(curve.lambdas[chosen]),
        variant_used=resolved,
        rule_hat=None,
        diagnostics={
            "min_error": min_error,
            "min_index": min_index,
            "threshold_used": threshold,
            "selected_index": chosen,
            "selected_error": float(curve.mean_error[chosen]),
        },
    )


def expand_cells(
    spec: EstimatorSpec,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    lambda2_grid: Sequence[float] = DEFAULT_LAMBDA2_GRID,
) -> list[EstimatorSpec]:
    """Expand a method into the fully-bound estimators its tuning grid spans."""
    m = spec.method
    if m is Method.LASSO or m is Method.UST:
        return [spec]
    if m is Method.ADAPTIVE_LASSO:
        return [EstimatorSpec(m, gamma_weights=g) for g in gamma_grid]
    if m is Method.ELASTIC_NET:
        return [EstimatorSpec(m, rule=ThresholdRule.elastic_net(l2)) for l2 in lambda2_grid]
    kind = spec.rule.kind
    if kind is ThresholdKind.ADAPTIVE:
        return [
            EstimatorSpec(m, rule=ThresholdRule.adaptive(nu, g))
            for nu in nu_grid
            for g in gamma_grid
        ]
    if kind is ThresholdKind.HARD:
        return [EstimatorSpec(m, rule=ThresholdRule.hard(nu)) for nu in nu_grid]
    return [EstimatorSpec(m, rule=ThresholdRule.soft(nu)) for nu in nu_grid]


def _cell_regularization(cell: EstimatorSpec) -> float:
    # tie-break key: prefer heavier covariance regularization
    if cell.rule is None:
        return cell.gamma_weights
    if cell.rule.kind is ThresholdKind.ELASTIC_NET:
        return cell.rule.lambda2
    return cell.rule.nu


def grid_search_cv(
    design: StandardizedDesign,
    spec: EstimatorSpec,
    *,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    lambda2_grid: Sequence[float] = DEFAULT_LAMBDA2_GRID,
    lambdas: Sequence[float] | None = None,
    k: int = DEFAULT_FOLDS,
    variant: CvVariant = CvVariant.AUTO,
    seed: int = 0,
) -> CvSelection:
    """Cross-validate over the method's full tuning grid.

    Every grid cell shares the same folds and lambda grid.  Cells are ranked
    by the mean validation error at their selected point; among cells within
    one fold standard deviation of the best (the same width the lambda walk
    uses), the heaviest covariance regularization wins, then the larger
    selected lambda.  Validation error cannot statistically distinguish such
    cells, and preferring the more regularized one counteracts the
    under-selection that plain error minimization produces when n is small.
    """
    if lambdas is None:
        lambdas = default_lambda_grid(design)
    cells = expand_cells(spec, nu_grid, gamma_grid, lambda2_grid)

    rows: list[tuple[EstimatorSpec, CvSelection, CvCurve]] = []
    for cell in cells:
        curve = kfold_cv(design, cell, lambdas, k, seed)
        sel = select_lambda(curve, variant, design.n, design.p)
        rows.append((cell, sel, curve))

    errors = [sel.diagnostics["selected_error"] for _, sel, _ in rows]
    anchor = min(
        range(len(rows)),
        key=lambda i: (errors[i], -_cell_regularization(rows[i][0]), -rows[i][1].lambda_hat),
    )
    _, anchor_sel, anchor_curve = rows[anchor]
    band = errors[anchor] + float(anchor_curve.sd_error[anchor_sel.diagnostics["min_index"]])
    pick = max(
        (i for i in range(len(rows)) if errors[i] <= band),
        key=lambda i: (_cell_regularization(rows[i][0]), rows[i][1].lambda_hat, -i),
    )
    best_cell, best_sel, _ = rows[pick]

    diagnostics = dict(best_sel.diagnostics)
    diagnostics["cell_label"] = best_cell.label()
    diagnostics["best_selected_error"] = errors[anchor]
    diagnostics["band_used"] = band
    return CvSelection(
        lambda_hat=best_sel.lambda_hat,
        variant_used=best_sel.variant_used,
        rule_hat=best_cell.rule,
        diagnostics=diagnostics,
        gamma_weights=(
            best_cell.gamma_weights if best_cell.method is Method.ADAPTIVE_LASSO else None
        ),
    )


@dataclass(frozen=True)
class BestPossible:
    path_index: int
    rule: ThresholdRule | None
    lam: float
    g: float
    n_selected: int


def best_possible_selection(
    paths: Sequence[SolutionPath],
    beta_star: np.ndarray,
) -> BestPossible:
    """Ex-post-facto tuning: the (path, lambda) maximizing G against the truth.

    Scans the support at every knot of every path plus every segment midpoint
    (a support can be realized only strictly inside a segment when an add is
    immediately followed by a drop).  Ties prefer fewer selected variables,
    then larger lambda.
    """
    beta_star = np.asarray(beta_star, dtype=float)
    best: BestPossible | None = None

    def consider(i: int, path: SolutionPath, lam: float, beta: np.ndarray):
        nonlocal best
        m = selection_metrics(beta, beta_star)
        n_sel = int(np.count_nonzero(beta))
        if (
            best is None
            or m.g > best.g
            or (m.g == best.g and (n_sel, -lam) < (best.n_selected, -best.lam))
        ):
            best = BestPossible(path_index=i, rule=path.rule, lam=lam, g=m.g, n_selected=n_sel)

    for i, path in enumerate(paths):
        bps = path.breakpoints
        for bp in bps:
            consider(i, path, bp.lam, bp.beta)
        for hi, lo in zip(bps, bps[1:]):
            mid = (hi.lam + lo.lam) / 2.0
            consider(i, path, mid, coefficients_at(path, mid))
    return best


def sis_screen(design: StandardizedDesign, keep: int) -> np.ndarray:
    """Sure independence screening: indices of the largest |X_j'y/n|.

    The result is in rank order (strongest marginal correlation first); ties
    break toward the smaller index.
    """
    if not 1 <= keep <= design.p:
        raise ValueError(f"keep must lie in [1, {design.p}]")
    scores = np.abs(design.xty())
    order = np.lexsort((np.arange(design.p), -scores))
    return order[:keep]
