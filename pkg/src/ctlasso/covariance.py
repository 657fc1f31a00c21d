"""Standardization, sample covariance, and sparse covariance-regularizing operators.

The regression machinery works on column-standardized data: each predictor has
mean zero and mean square one (variance with divisor n), so the sample
covariance matrix ``X'X/n`` is a correlation matrix with unit diagonal.
Thresholding operators act entry-wise on the off-diagonal of that matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
import scipy.linalg

from .exceptions import (
    ConstantColumn,
    DimensionMismatch,
    EmptySubset,
    TooFewSamples,
)


class ThresholdKind(str, Enum):
    IDENTITY = "identity"
    HARD = "hard"
    SOFT = "soft"
    ADAPTIVE = "adaptive"
    ELASTIC_NET = "elastic_net"


@dataclass(frozen=True)
class ThresholdRule:
    """A covariance-regularizing operator and its parameters.

    ``nu`` is the threshold level for hard/soft/adaptive operators, ``gamma``
    the adaptive exponent, ``lambda2`` the ridge level of the elastic-net
    operator.  The identity rule ignores all parameters and reproduces the
    plain lasso.
    """

    kind: ThresholdKind
    nu: float = 0.0
    gamma: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.lambda2 < 0.0:
            raise ValueError(f"lambda2 must be >= 0, got {self.lambda2}")

    @classmethod
    def identity(cls) -> "ThresholdRule":
        return cls(ThresholdKind.IDENTITY)

    @classmethod
    def hard(cls, nu: float) -> "ThresholdRule":
        return cls(ThresholdKind.HARD, nu=nu)

    @classmethod
    def soft(cls, nu: float) -> "ThresholdRule":
        return cls(ThresholdKind.SOFT, nu=nu)

    @classmethod
    def adaptive(cls, nu: float, gamma: float) -> "ThresholdRule":
        return cls(ThresholdKind.ADAPTIVE, nu=nu, gamma=gamma)

    @classmethod
    def elastic_net(cls, lambda2: float) -> "ThresholdRule":
        return cls(ThresholdKind.ELASTIC_NET, lambda2=lambda2)

    def label(self) -> str:
        if self.kind is ThresholdKind.IDENTITY:
            return "identity"
        if self.kind is ThresholdKind.HARD:
            return f"hard(nu={self.nu:g})"
        if self.kind is ThresholdKind.SOFT:
            return f"soft(nu={self.nu:g})"
        if self.kind is ThresholdKind.ADAPTIVE:
            return f"adaptive(nu={self.nu:g},gamma={self.gamma:g})"
        return f"elastic_net(lambda2={self.lambda2:g})"


@dataclass(frozen=True)
class StandardizedDesign:
    """Centered response and column-standardized predictors.

    ``x`` has columns with mean 0 and mean square 1 (divisor-n variance); ``y``
    is centered. ``column_means``/``column_scales``/``y_mean`` carry the affine
    transform back to original units.
    """

    x: np.ndarray
    y: np.ndarray
    n: int
    p: int
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float

    def xty(self) -> np.ndarray:
        """Marginal correlations X'y/n of the standardized data."""
        return self.x.T @ self.y / self.n


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric covariance (or correlation) matrix."""

    entries: np.ndarray
    p: int = field(default=0)

    def __post_init__(self):
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"covariance matrix must be square, got {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("covariance matrix must be exactly symmetric")
        object.__setattr__(self, "p", m.shape[0])


def standardize(raw_x: np.ndarray, raw_y: np.ndarray) -> StandardizedDesign:
    """Center and scale predictors to mean 0 / mean square 1; center the response.

    Variances use divisor n so that the standardized columns satisfy
    ``sum(x_j**2)/n == 1`` exactly, giving a unit-diagonal sample covariance.

    Raises
    ------
    ConstantColumn
        If some column has zero variance.
    DimensionMismatch
        If ``raw_y`` length differs from the row count of ``raw_x``.
    TooFewSamples
        If fewer than two rows are supplied.
    """
    x = np.asarray(raw_x, dtype=float)
    y = np.asarray(raw_y, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch(f"raw_x must be 2-d, got ndim={x.ndim}")
    n, p = x.shape
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    if y.shape != (n,):
        raise DimensionMismatch(f"raw_y has shape {y.shape}, expected ({n},)")

    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt(np.mean(centered**2, axis=0))
    for j in np.flatnonzero(scales == 0.0):
        raise ConstantColumn(int(j))

    y_mean = float(y.mean())
    return StandardizedDesign(
        x=centered / scales,
        y=y - y_mean,
        n=n,
        p=p,
        column_means=means,
        column_scales=scales,
        y_mean=y_mean,
    )


def sample_covariance(design: StandardizedDesign) -> CovMatrix:
    """Sample covariance X'X/n of a standardized design (unit diagonal)."""
    m = design.x.T @ design.x / design.n
    m = (m + m.T) / 2.0  # kill BLAS round-off asymmetry
    return CovMatrix(m)


def _threshold_offdiag(values: np.ndarray, rule: ThresholdRule) -> np.ndarray:
    """Apply the rule's scalar operator element-wise (off-diagonal semantics)."""
    v = values
    if rule.kind is ThresholdKind.IDENTITY:
        return v.copy()
    if rule.kind is ThresholdKind.HARD:
        return np.where(np.abs(v) > rule.nu, v, 0.0)
    if rule.kind is ThresholdKind.SOFT:
        return np.sign(v) * np.maximum(np.abs(v) - rule.nu, 0.0)
    if rule.kind is ThresholdKind.ADAPTIVE:
        # shrink amount nu**(gamma+1) * |v|**(-gamma); entries at or below the
        # threshold map to exactly zero (covers the |v|=0 singularity)
        absv = np.abs(v)
        out = np.zeros_like(v)
        big = absv > rule.nu
        shrink = rule.nu * (rule.nu / absv[big]) ** rule.gamma
        out[big] = np.sign(v[big]) * np.maximum(absv[big] - shrink, 0.0)
        return out
    if rule.kind is ThresholdKind.ELASTIC_NET:
        # matrix form (cov + lambda2*I)/(1 + lambda2): off-diagonal entries
        # shrink proportionally, the unit diagonal is unchanged
        return v / (1.0 + rule.lambda2)
    raise ValueError(f"unknown rule kind {rule.kind}")


def apply_threshold(cov: CovMatrix, rule: ThresholdRule) -> CovMatrix:
    """Return the covariance matrix with the rule applied off-diagonal.

    Diagonal entries are left untouched; symmetry is preserved exactly.
    """
    m = cov.entries
    out = _threshold_offdiag(m, rule)
    np.fill_diagonal(out, np.diagonal(m))
    return CovMatrix(out)


def min_eigenvalue(cov: CovMatrix, subset: Iterable[int]) -> float:
    """Smallest eigenvalue of the principal submatrix on ``subset``."""
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=int)
    if idx.size == 0:
        raise EmptySubset("subset must contain at least one index")
    if idx.min() < 0 or idx.max() >= cov.p:
        raise DimensionMismatch(f"subset indices must lie in [0, {cov.p})")
    sub = cov.entries[np.ix_(idx, idx)]
    w = scipy.linalg.eigh(sub, eigvals_only=True)
    return float(w[0])
