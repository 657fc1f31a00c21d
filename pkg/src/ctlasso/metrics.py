"""Variable-selection and prediction-accuracy metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import CovMatrix
from .exceptions import DegenerateTruth, DimensionMismatch


@dataclass(frozen=True)
class SelectionMetrics:
    tp: int
    fp: int
    sensitivity: float
    specificity: float
    g: float


def selection_metrics(beta_hat: np.ndarray, beta_star: np.ndarray) -> SelectionMetrics:
    """Support-recovery metrics of ``beta_hat`` against the truth ``beta_star``.

    Supports are compared by exact nonzero test.  ``g`` is the geometric mean
    of sensitivity (true positives / s) and specificity (1 - false positives /
    (p - s)); it requires the truth to have at least one zero and one nonzero.
    """
    beta_hat = np.asarray(beta_hat)
    beta_star = np.asarray(beta_star)
    if beta_hat.shape != beta_star.shape:
        raise DimensionMismatch(
            f"shapes {beta_hat.shape} and {beta_star.shape} differ"
        )
    p = beta_star.shape[0]
    true_supp = beta_star != 0.0
    s = int(np.count_nonzero(true_supp))
    if s == 0 or s == p:
        raise DegenerateTruth(f"truth has s={s} nonzeros out of p={p}")
    est_supp = beta_hat != 0.0
    tp = int(np.count_nonzero(est_supp & true_supp))
    fp = int(np.count_nonzero(est_supp & ~true_supp))
    sens = tp / s
    spec = 1.0 - fp / (p - s)
    return SelectionMetrics(tp=tp, fp=fp, sensitivity=sens, specificity=spec,
                            g=float(np.sqrt(sens * spec)))


def rpe(
    beta_hat: np.ndarray,
    beta_star: np.ndarray,
    sigma_pop: CovMatrix,
    sigma_noise: float,
) -> float:
    """Relative prediction error ``(d' Sigma d) / sigma^2`` with ``d = beta_hat - beta_star``."""
    if sigma_noise <= 0:
        raise ValueError("sigma_noise must be positive")
    d = np.asarray(beta_hat, dtype=float) - np.asarray(beta_star, dtype=float)
    if d.shape != (sigma_pop.p,):
        raise DimensionMismatch(
            f"coefficient length {d.shape} does not match covariance dimension {sigma_pop.p}"
        )
    return float(d @ sigma_pop.entries @ d) / sigma_noise**2


def sign_agreement(beta_hat: np.ndarray, beta_star: np.ndarray) -> bool:
    """True iff the sign patterns match component-wise (sign in {-1, 0, 1})."""
    return bool(np.array_equal(np.sign(beta_hat), np.sign(beta_star)))


def bootstrap_se_of_median(values: np.ndarray, b: int, seed: int) -> float:
    """Standard deviation of the median over ``b`` resamples with replacement."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must be non-empty")
    if b < 2:
        raise ValueError("need at least 2 resamples")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, values.size, size=(b, values.size))
    medians = np.median(values[idx], axis=1)
    return float(np.std(medians))
