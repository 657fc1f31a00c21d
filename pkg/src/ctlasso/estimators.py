"""Baseline and derived estimators sharing the path machinery.

All methods reduce to a soft-threshold path over some gram matrix: the lasso
uses the sample covariance, the covariance-thresholded lasso a thresholded
version, the elastic net a ridge-regularized version, univariate soft
thresholding (UST) the identity, and the adaptive lasso a column-reweighted
gram with coefficients mapped back through the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import StandardizedDesign, ThresholdKind, ThresholdRule
from .exceptions import ZeroInitialEstimate
from .path import Breakpoint, SolutionPath, Termination, ct_lars, solve_path_gram


class Method(str, Enum):
    LASSO = "lasso"
    CT_LASSO = "ct-lasso"
    UST = "ust"
    ADAPTIVE_LASSO = "adaptive-lasso"
    ELASTIC_NET = "elastic-net"


@dataclass(frozen=True)
class EstimatorSpec:
    """A named estimator: method plus the rule/weight parameters it needs.

    For ``CT_LASSO`` the rule carries the operator flavor and its parameters;
    for ``ELASTIC_NET`` it carries ``lambda2``.  ``gamma_weights`` is the
    adaptive-lasso weight exponent.  The plain lasso is structurally the
    covariance-thresholded lasso with the identity rule.
    """

    method: Method
    rule: ThresholdRule | None = None
    gamma_weights: float = 0.0

    def __post_init__(self):
        if self.gamma_weights < 0:
            raise ValueError("gamma_weights must be >= 0")
        if self.method is Method.LASSO:
            if self.rule is not None and self.rule.kind is not ThresholdKind.IDENTITY:
                raise ValueError("lasso requires the identity rule")
            object.__setattr__(self, "rule", ThresholdRule.identity())
        elif self.method is Method.CT_LASSO:
            if self.rule is None:
                raise ValueError("ct-lasso requires a threshold rule")
        elif self.method is Method.ELASTIC_NET:
            if self.rule is None:
                object.__setattr__(self, "rule", ThresholdRule.elastic_net(0.0))
            elif self.rule.kind is not ThresholdKind.ELASTIC_NET:
                raise ValueError("elastic-net requires an elastic_net rule")

    def label(self) -> str:
        if self.method is Method.CT_LASSO:
            return f"ct-lasso-{self.rule.kind.value}"
        if self.method is Method.ADAPTIVE_LASSO:
            return f"adaptive-lasso(gamma={self.gamma_weights:g})"
        return self.method.value


def ust_fit(design: StandardizedDesign, lam: float) -> np.ndarray:
    """Univariate soft thresholding of the marginal correlations X'y/n."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    r = design.xty()
    return np.sign(r) * np.maximum(np.abs(r) - lam, 0.0)


def ust_path(
    design: StandardizedDesign,
    *,
    lambda_floor: float | None = None,
) -> SolutionPath:
    """Exact UST path: the thresholded-covariance path with covariance forced to I.

    Built in closed form; knots sit at the distinct values of ``|r_j|`` and
    coefficients are component-wise soft thresholds.
    """
    r = design.xty()
    lam_max = float(np.max(np.abs(r))) if r.size else 0.0
    if lambda_floor is None:
        lambda_floor = 1e-8 * lam_max
    if lam_max == 0.0:
        bp = Breakpoint(lam=0.0, beta=np.zeros_like(r), active=())
        return SolutionPath([bp], Termination.CORRELATION_EXHAUSTED, rule=None)

    knots = sorted({abs(v) for v in r if abs(v) > lambda_floor}, reverse=True)
    breakpoints = []
    for lam in knots:
        active = tuple(int(j) for j in np.flatnonzero(np.abs(r) >= lam))
        breakpoints.append(Breakpoint(lam=lam, beta=ust_fit(design, lam), active=active))
    active_floor = tuple(int(j) for j in np.flatnonzero(np.abs(r) > lambda_floor))
    breakpoints.append(
        Breakpoint(lam=lambda_floor, beta=ust_fit(design, lambda_floor), active=active_floor)
    )
    return SolutionPath(breakpoints, Termination.LAMBDA_FLOOR, rule=None)


def adaptive_lasso_path(
    design: StandardizedDesign,
    gamma: float,
    *,
    max_steps: int | None = None,
    lambda_floor: float | None = None,
    tol: float = 1e-12,
) -> SolutionPath:
    """Adaptive lasso path with univariate initial estimates.

    With initial estimates ``b0 = X'y/n``, column j is rescaled by
    ``|b0_j|**gamma``, the plain lasso path is solved on the reweighted gram,
    and coefficients are mapped back by multiplying with the same weights.
    ``gamma = 0`` reduces to the lasso.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0.0:
        return ct_lars(
            design, ThresholdRule.identity(),
            max_steps=max_steps, lambda_floor=lambda_floor, tol=tol,
        )

    r = design.xty()
    for j in np.flatnonzero(np.abs(r) < 1e-14):
        raise ZeroInitialEstimate(int(j))
    w = np.abs(r) ** gamma

    # Reweighted problem: gram D S D and correlations D r for D = diag(w).
    sigma = design.x.T @ design.x / design.n
    sigma = (sigma + sigma.T) / 2.0
    sigma_w = sigma * np.outer(w, w)
    sigma_w = (sigma_w + sigma_w.T) / 2.0
    if max_steps is None:
        max_steps = 8 * min(design.n, design.p) + design.p
    inner = solve_path_gram(
        sigma_w, w * r,
        rule=None, max_steps=max_steps, lambda_floor=lambda_floor, tol=tol,
    )
    breakpoints = [
        Breakpoint(lam=bp.lam, beta=bp.beta * w, active=bp.active, is_global=bp.is_global)
        for bp in inner.breakpoints
    ]
    return SolutionPath(breakpoints, inner.termination, rule=None, error=inner.error)


def elastic_net_path(
    design: StandardizedDesign,
    lambda2: float,
    *,
    max_steps: int | None = None,
    lambda_floor: float | None = None,
    tol: float = 1e-12,
) -> SolutionPath:
    """Elastic-net path: the thresholded-covariance path under the ridge operator.

    The covariance is replaced by ``(S + lambda2*I)/(1 + lambda2)``, positive
    definite for ``lambda2 > 0``, so no eigenvalue stop can occur.
    """
    return ct_lars(
        design, ThresholdRule.elastic_net(lambda2),
        max_steps=max_steps, lambda_floor=lambda_floor, tol=tol,
    )


def fit_path(
    design: StandardizedDesign,
    spec: EstimatorSpec,
    *,
    max_steps: int | None = None,
    lambda_floor: float | None = None,
    tol: float = 1e-12,
) -> SolutionPath:
    """Solve the estimator's full path on a standardized design."""
    if spec.method is Method.UST:
        return ust_path(design, lambda_floor=lambda_floor)
    if spec.method is Method.ADAPTIVE_LASSO:
        return adaptive_lasso_path(
            design, spec.gamma_weights,
            max_steps=max_steps, lambda_floor=lambda_floor, tol=tol,
        )
    return ct_lars(
        design, spec.rule,
        max_steps=max_steps, lambda_floor=lambda_floor, tol=tol,
    )
