"""Theory diagnostics: irrepresentable indices, covariance sparsity degrees,
eigenvalue conditions, and the finite-sample sign-recovery certificate.

These quantify, for a given covariance matrix and true-variable set, how
favorable the problem is for sign-consistent selection: the irrepresentable
index measures inter-connectivity between irrelevant and true variables, the
sparsity degrees count nonzero covariances row-wise inside and into the
true-variable block, and the certificate checks the exact finite-sample
conditions under which the solution provably recovers the signs of the truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import (
    CovMatrix,
    StandardizedDesign,
    ThresholdKind,
    ThresholdRule,
    apply_threshold,
    min_eigenvalue,
    sample_covariance,
)
from .exceptions import EmptySubset, SingularSS

_ZERO_TOL = 1e-14


def _split_sets(p: int, s_set) -> tuple[np.ndarray, np.ndarray]:
    s_idx = np.asarray(sorted(set(int(i) for i in s_set)), dtype=int)
    if s_idx.size == 0:
        raise EmptySubset("true-variable set must be non-empty")
    if s_idx.min() < 0 or s_idx.max() >= p:
        raise ValueError(f"s_set indices must lie in [0, {p})")
    mask = np.ones(p, dtype=bool)
    mask[s_idx] = False
    return s_idx, np.flatnonzero(mask)


def irrepresentable_index(
    cov: CovMatrix,
    s_set,
    signs: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Irrepresentable index entries and the sign-free infinity-norm bound.

    Returns ``|Sigma_CS Sigma_SS^{-1} signs|`` per irrelevant variable (in
    increasing index order) together with ``||Sigma_CS Sigma_SS^{-1}||_inf``.
    Entries below 1 are required for sign-consistent selection.
    """
    s_idx, c_idx = _split_sets(cov.p, s_set)
    signs = np.asarray(signs, dtype=float)
    if signs.shape != (s_idx.size,):
        raise ValueError(f"signs must have length {s_idx.size}")
    m = cov.entries
    sigma_ss = m[np.ix_(s_idx, s_idx)]
    sigma_cs = m[np.ix_(c_idx, s_idx)]
    try:
        solved_signs = np.linalg.solve(sigma_ss, signs)
        solved_cs = np.linalg.solve(sigma_ss, sigma_cs.T)
    except np.linalg.LinAlgError as exc:
        raise SingularSS(str(exc)) from exc
    entries = np.abs(sigma_cs @ solved_signs)
    inf_norm = float(np.max(np.sum(np.abs(solved_cs.T), axis=1))) if c_idx.size else 0.0
    return entries, inf_norm


def sparsity_degrees(cov: CovMatrix, s_set) -> tuple[int, int]:
    """Row-wise nonzero-covariance counts (d_ss, d_cs) for the true-variable block.

    ``d_ss`` is the largest number of true variables any true variable is
    correlated with (itself included); ``d_cs`` the largest number of true
    variables any irrelevant variable is correlated with.  Entries with
    magnitude at most 1e-14 count as zero.
    """
    s_idx, c_idx = _split_sets(cov.p, s_set)
    if c_idx.size == 0:
        raise ValueError("s_set must be a proper subset")
    nz = np.abs(cov.entries) > _ZERO_TOL
    d_ss = int(np.max(np.sum(nz[np.ix_(s_idx, s_idx)], axis=1)))
    d_cs = int(np.max(np.sum(nz[np.ix_(c_idx, s_idx)], axis=1)))
    return d_ss, d_cs


def recommended_nu(n: int, p: int, s: int, c: float = 1.0) -> float:
    """Threshold level ``c * sqrt(log(s(p-s))) / sqrt(n)`` (c defaults to 1)."""
    if not 1 <= s < p:
        raise ValueError("need 1 <= s < p")
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(c * np.sqrt(np.log(s * (p - s))) / np.sqrt(n))


@dataclass(frozen=True)
class SignRecoveryCertificate:
    holds: bool
    which_failed: tuple[str, ...]
    details: dict


def sign_recovery_certificate(
    design: StandardizedDesign,
    eps_vec: np.ndarray,
    beta_star: np.ndarray,
    rule: ThresholdRule,
    lam: float,
) -> SignRecoveryCertificate:
    """Exact finite-sample sign-recovery conditions, given the realized noise.

    For the model ``y = X beta* + eps`` on the standardized design, evaluates
    the three conditions under which the thresholded-covariance solution at
    penalty ``lam`` provably has the signs of ``beta*``:

    - nonsingularity: the thresholded true-variable submatrix is positive
      definite;
    - irrep_bound: the inter-connectivity bound
      ``||S_CS S_SS^{-1}||_inf (e_S + s nu rho_max + lam) + s nu rho_max + e_C
      <= lam`` with ``e_S = ||X_S' eps/n||_inf`` and ``e_C = ||X_C' eps/n||_inf``;
    - beta_min: ``||S_SS^{-1}||_inf (e_S + s nu rho_max + lam) < rho_min``.

    ``rho_max``/``rho_min`` are the largest/smallest nonzero magnitudes of
    ``beta*`` and ``nu`` the rule's threshold level.  When nonsingularity
    fails the remaining conditions are not evaluated.
    """
    if rule.kind is ThresholdKind.ELASTIC_NET:
        raise ValueError("certificate applies to thresholding operators, not the elastic net")
    beta_star = np.asarray(beta_star, dtype=float)
    eps_vec = np.asarray(eps_vec, dtype=float)
    s_idx = np.flatnonzero(beta_star != 0.0)
    if s_idx.size == 0:
        raise EmptySubset("beta_star must have a non-empty support")
    _, c_idx = _split_sets(design.p, s_idx)

    nu = 0.0 if rule.kind is ThresholdKind.IDENTITY else rule.nu
    s = int(s_idx.size)
    rho_max = float(np.max(np.abs(beta_star[s_idx])))
    rho_min = float(np.min(np.abs(beta_star[s_idx])))

    cov_nu = apply_threshold(sample_covariance(design), rule).entries
    sigma_ss = cov_nu[np.ix_(s_idx, s_idx)]
    sigma_cs = cov_nu[np.ix_(c_idx, s_idx)]

    noise = design.x.T @ eps_vec / design.n
    e_s = float(np.max(np.abs(noise[s_idx])))
    e_c = float(np.max(np.abs(noise[c_idx]))) if c_idx.size else 0.0

    lam_min_ss = float(np.linalg.eigvalsh(sigma_ss)[0])
    details = {
        "lambda_min_ss": lam_min_ss,
        "noise_s": e_s,
        "noise_c": e_c,
        "rho_max": rho_max,
        "rho_min": rho_min,
        "nu": nu,
        "lambda": lam,
    }
    if lam_min_ss <= 0.0:
        return SignRecoveryCertificate(False, ("nonsingularity",), details)

    ss_inv = np.linalg.inv(sigma_ss)
    d_bar = float(np.max(np.sum(np.abs(ss_inv), axis=1)))
    cs_ssinv = sigma_cs @ ss_inv
    irrep_norm = float(np.max(np.sum(np.abs(cs_ssinv), axis=1))) if c_idx.size else 0.0
    details["irrep_norm"] = irrep_norm
    details["ss_inv_norm"] = d_bar

    inner = e_s + s * nu * rho_max + lam
    failed = []
    if irrep_norm * inner + s * nu * rho_max + e_c > lam:
        failed.append("irrep_bound")
    if not d_bar * inner < rho_min:
        failed.append("beta_min")
    return SignRecoveryCertificate(holds=not failed, which_failed=tuple(failed), details=details)


@dataclass(frozen=True)
class DiagnosticsReport:
    irrep_index: np.ndarray
    irrep_max: float
    d_ss: int
    d_cs: int
    lambda_min_ss: float
    nu_recommended: float | None
    max_abs_beta: float | None = None
    min_abs_beta: float | None = None
    sign_recovery: SignRecoveryCertificate | None = None


def build_report(
    cov: CovMatrix,
    s_set,
    signs: np.ndarray | None = None,
    *,
    n: int | None = None,
    beta_star: np.ndarray | None = None,
    sign_recovery: SignRecoveryCertificate | None = None,
) -> DiagnosticsReport:
    """Assemble the diagnostics for one covariance matrix and true-variable set."""
    s_idx, _ = _split_sets(cov.p, s_set)
    if signs is None:
        signs = np.ones(s_idx.size)
    entries, inf_norm = irrepresentable_index(cov, s_idx, signs)
    d_ss, d_cs = sparsity_degrees(cov, s_idx)
    nu_rec = None
    if n is not None:
        nu_rec = recommended_nu(n, cov.p, s_idx.size)
    max_b = min_b = None
    if beta_star is not None:
        beta_star = np.asarray(beta_star, dtype=float)
        nz = np.abs(beta_star[np.abs(beta_star) > 0])
        if nz.size:
            max_b, min_b = float(nz.max()), float(nz.min())
    return DiagnosticsReport(
        irrep_index=entries,
        irrep_max=inf_norm,
        d_ss=d_ss,
        d_cs=d_cs,
        lambda_min_ss=min_eigenvalue(cov, s_idx),
        nu_recommended=nu_rec,
        max_abs_beta=max_b,
        min_abs_beta=min_b,
        sign_recovery=sign_recovery,
    )
