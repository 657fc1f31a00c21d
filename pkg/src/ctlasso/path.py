"""Piecewise-linear solution paths for the covariance-thresholded lasso.

The solver is a modified LARS over the thresholded sample covariance matrix.
Given standardized data with marginal correlations ``r = X'y/n`` and a
regularized covariance ``S``, it tracks the coefficient vector minimizing

    beta' S beta - 2 beta' r + 2 lambda ||beta||_1

as ``lambda`` decreases from ``max|r_j|``.  On each segment the active
coefficients move along ``gamma_A = S_A^{-1} sign(beta_A)`` per unit decrease
of ``lambda``; segment ends are variable additions (an inactive correlation
catches up with the active ones) or drops (an active coefficient crosses
zero).  The path stops when the active correlations are exhausted, when the
active submatrix of ``S`` loses positive definiteness (the quadratic term is
no longer convex on the active set), when ``lambda`` hits a floor, or at a
step cap.

``oracle_solve`` is an independent cyclic coordinate-descent minimizer of the
same objective, used to cross-check the path solver on positive semi-definite
instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .covariance import (
    CovMatrix,
    StandardizedDesign,
    ThresholdRule,
    apply_threshold,
    sample_covariance,
)
from .exceptions import (
    DimensionMismatch,
    IndefiniteMatrix,
    LambdaBelowPath,
    NotConverged,
)

# Active submatrices with smallest eigenvalue at or below this are treated as
# having lost positive definiteness (the stop rule's boundary).
PSD_TOL = 1e-12

# Relative tolerance for detecting ties of inactive correlations with the
# active correlation magnitude.
_TIE_RTOL = 1e-12


class Termination(str, Enum):
    CORRELATION_EXHAUSTED = "CorrelationExhausted"
    EIGENVALUE_STOP = "EigenvalueStop"
    MAX_STEPS = "MaxSteps"
    LAMBDA_FLOOR = "LambdaFloor"


@dataclass(frozen=True)
class Breakpoint:
    """One knot of the piecewise-linear path.

    ``active`` is the active set holding on the segment below this lambda;
    ``is_global`` records whether the solution here is certifiably a global
    minimum (all inactive marginal correlations below lambda and the active
    submatrix positive definite) - informative when the thresholded covariance
    is indefinite, always true in the convex regime.
    """

    lam: float
    beta: np.ndarray
    active: tuple[int, ...]
    is_global: bool = True


@dataclass(frozen=True)
class SolutionPath:
    """Ordered breakpoints of a solution path, with the rule that produced it.

    ``rule`` is None for paths solved against a forced identity covariance
    (univariate soft thresholding) or a reweighted gram matrix.  ``error`` is
    set when the path ended early on a failed direction solve.
    """

    breakpoints: list[Breakpoint]
    termination: Termination
    rule: ThresholdRule | None
    error: str | None = None

    @property
    def lambda_max(self) -> float:
        return self.breakpoints[0].lam

    @property
    def lambda_min(self) -> float:
        return self.breakpoints[-1].lam

    @property
    def p(self) -> int:
        return self.breakpoints[0].beta.shape[0]


@dataclass
class PathState:
    """Mutable solver state: coefficients, residual correlations, direction."""

    beta: np.ndarray
    c_hat: np.ndarray
    c_max: float
    active: list[int]
    direction: np.ndarray
    a: np.ndarray


@dataclass(frozen=True)
class KktReport:
    passed: bool
    worst_violation: float


def residual_correlations(beta: np.ndarray, cov_nu: CovMatrix, xty: np.ndarray) -> np.ndarray:
    """Covariate-residual correlations ``xty - cov_nu' beta``."""
    beta = np.asarray(beta, dtype=float)
    xty = np.asarray(xty, dtype=float)
    if beta.shape != (cov_nu.p,) or xty.shape != (cov_nu.p,):
        raise DimensionMismatch(
            f"expected vectors of length {cov_nu.p}, got {beta.shape} and {xty.shape}"
        )
    return xty - cov_nu.entries.T @ beta


def kkt_check(
    beta: np.ndarray,
    lam: float,
    cov_nu: CovMatrix,
    xty: np.ndarray,
    tol: float,
) -> KktReport:
    """Check subgradient optimality of ``beta`` at penalty ``lam``.

    Active coordinates must satisfy ``c_j == lam * sign(beta_j)`` within
    ``tol``; inactive ones must satisfy ``|c_j| <= lam + tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = residual_correlations(beta, cov_nu, xty)
    nonzero = beta != 0.0
    worst = 0.0
    if np.any(nonzero):
        worst = float(np.max(np.abs(c[nonzero] - lam * np.sign(beta[nonzero]))))
    if np.any(~nonzero):
        worst = max(worst, float(np.max(np.abs(c[~nonzero]) - lam)))
    return KktReport(passed=worst <= tol, worst_violation=worst)


def _min_eig(sub: np.ndarray) -> float:
    return float(scipy.linalg.eigh(sub, eigvals_only=True)[0])


def _record(breakpoints: list[Breakpoint], bp: Breakpoint) -> None:
    # Zero-length events (simultaneous adds/drops) update the previous knot
    # in place so lambda stays strictly decreasing.
    if breakpoints and bp.lam >= breakpoints[-1].lam:
        breakpoints[-1] = Breakpoint(
            lam=breakpoints[-1].lam, beta=bp.beta, active=bp.active, is_global=bp.is_global
        )
    else:
        breakpoints.append(bp)


def _min_pos(values: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum over strictly positive entries; (inf, empty) if none."""
    pos = values > 0.0
    if not np.any(pos):
        return np.inf, np.empty(0, dtype=int)
    m = float(np.min(values[pos]))
    hits = np.flatnonzero(pos & (values <= m * (1.0 + _TIE_RTOL)))
    return m, hits


def solve_path_gram(
    sigma: np.ndarray,
    xty: np.ndarray,
    *,
    rule: ThresholdRule | None = None,
    max_steps: int | None = None,
    lambda_floor: float | None = None,
    tol: float = 1e-12,
) -> SolutionPath:
    """Run the modified LARS on an explicit (already regularized) gram matrix.

    This is the computational core shared by :func:`ct_lars`, the elastic-net
    and adaptive-lasso reductions, and the univariate-soft-threshold baseline.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    sigma = np.asarray(sigma, dtype=float)
    xty = np.asarray(xty, dtype=float)
    p = xty.shape[0]
    if sigma.shape != (p, p):
        raise DimensionMismatch(f"gram matrix {sigma.shape} does not match xty ({p},)")

    n_proxy = p  # max_steps default uses min(n, p); gram callers pass explicit caps
    if max_steps is None:
        max_steps = 8 * n_proxy + p

    r0 = xty.copy()
    lam = float(np.max(np.abs(r0))) if p else 0.0
    if lambda_floor is None:
        lambda_floor = 1e-8 * lam

    beta = np.zeros(p)
    c_hat = r0.copy()
    if lam <= tol:
        bp = Breakpoint(lam=lam, beta=beta.copy(), active=(), is_global=True)
        return SolutionPath([bp], Termination.CORRELATION_EXHAUSTED, rule)

    active = sorted(np.flatnonzero(np.abs(c_hat) >= lam * (1.0 - _TIE_RTOL)).tolist())
    state = PathState(
        beta=beta, c_hat=c_hat, c_max=lam, active=active,
        direction=np.zeros(p), a=np.zeros(p),
    )

    breakpoints: list[Breakpoint] = []
    pd_ok = True
    _record(breakpoints, _make_bp(state, r0, pd_ok))

    termination: Termination | None = None
    error: str | None = None
    just_dropped: set[int] = set()
    need_eig_check = True  # initial active set must be vetted before solving
    steps = 0

    while termination is None:
        lam = state.c_max
        if lam <= tol:
            termination = Termination.CORRELATION_EXHAUSTED
            break
        if lam <= lambda_floor:
            termination = Termination.LAMBDA_FLOOR
            break

        # Absorb inactive variables already tied with the active correlation
        # (simultaneous-entry ties): add smallest index per zero-length step.
        tie = _find_tie(state, just_dropped, lam)
        if tie is not None:
            state.active = sorted(state.active + [tie])
            need_eig_check = True
            _record(breakpoints, _make_bp(state, r0, pd_ok))
            continue

        if steps >= max_steps:
            termination = Termination.MAX_STEPS
            break
        steps += 1

        idx = np.asarray(state.active, dtype=int)
        sub = sigma[np.ix_(idx, idx)]
        if need_eig_check:
            if _min_eig(sub) <= PSD_TOL:
                pd_ok = False
                _record(breakpoints, _make_bp(state, r0, pd_ok))
                termination = Termination.EIGENVALUE_STOP
                break
            need_eig_check = False

        signs = np.sign(state.beta[idx])
        zero_sign = signs == 0.0
        if np.any(zero_sign):
            signs[zero_sign] = np.sign(state.c_hat[idx[zero_sign]])
        try:
            cho = scipy.linalg.cho_factor(sub, lower=True, check_finite=False)
            gamma_a = scipy.linalg.cho_solve(cho, signs, check_finite=False)
        except scipy.linalg.LinAlgError:
            # PD was verified at the last active-set change, so a failure here
            # means the factorization is numerically unusable.
            error = "SingularActiveSubmatrix"
            termination = Termination.EIGENVALUE_STOP
            break

        gamma = np.zeros(p)
        gamma[idx] = gamma_a
        a = sigma.T @ gamma
        state.direction = gamma
        state.a = a

        # Step to the next drop: active coefficient crossing zero.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(gamma_a != 0.0, -state.beta[idx] / gamma_a, -np.inf)
        delta1, drop_hits = _min_pos(ratios)

        # Step to the next add: inactive |correlation| catching up with lam.
        # Active correlations decay at unit rate (sigma_A gamma_A = signs), so
        # equality occurs at (lam - c_j)/(1 - a_j) or (lam + c_j)/(1 + a_j).
        mask = np.ones(p, dtype=bool)
        mask[idx] = False
        cand = np.flatnonzero(mask)
        delta2 = np.inf
        add_j = -1
        if cand.size:
            cj = state.c_hat[cand]
            aj = a[cand]
            with np.errstate(divide="ignore", invalid="ignore"):
                d_plus = (lam - cj) / (1.0 - aj)
                d_minus = (lam + cj) / (1.0 + aj)
            both = np.concatenate([d_plus, d_minus])
            if just_dropped:
                # A variable dropped at the current lam sits exactly on one
                # correlation boundary; the near-zero root on that branch is
                # spurious (re-entry there would undo the drop), while the
                # root on the opposite branch is a genuine future event.
                jd = np.isin(cand, list(just_dropped))
                spurious = np.concatenate([jd, jd]) & (both <= lam * 1e-12)
                both = np.where(spurious, -np.inf, both)
            val, hits = _min_pos(both)
            if np.isfinite(val):
                delta2 = val
                add_j = int(np.min(cand[hits % cand.size]))

        delta_floor = lam - lambda_floor
        delta = min(delta1, delta2, delta_floor)

        state.beta = state.beta + delta * gamma
        state.c_hat = state.c_hat - delta * a
        state.c_max = float(np.max(np.abs(state.c_hat[idx])))
        just_dropped = set()

        if delta == delta_floor and delta < delta1 and delta < delta2:
            _record(breakpoints, _make_bp(state, r0, pd_ok))
            termination = Termination.LAMBDA_FLOOR
            break

        if delta1 <= delta2:
            dropped = [int(idx[h]) for h in drop_hits]
            for j in dropped:
                state.beta[j] = 0.0
            state.active = sorted(set(state.active) - set(dropped))
            just_dropped = set(dropped)
            if not state.active:
                # All coefficients returned to zero; correlations exhausted.
                _record(breakpoints, _make_bp(state, r0, pd_ok))
                termination = Termination.CORRELATION_EXHAUSTED
                break
        else:
            state.active = sorted(state.active + [add_j])
            need_eig_check = True

        _record(breakpoints, _make_bp(state, r0, pd_ok))

    return SolutionPath(breakpoints, termination, rule, error=error)


def _find_tie(state: PathState, just_dropped: set[int], lam: float) -> int | None:
    thresh = lam * (1.0 - _TIE_RTOL)
    active = set(state.active)
    for j in np.flatnonzero(np.abs(state.c_hat) >= thresh):
        j = int(j)
        if j not in active and j not in just_dropped:
            return j
    return None


def _make_bp(state: PathState, r0: np.ndarray, pd_ok: bool) -> Breakpoint:
    lam = state.c_max
    inactive = np.ones(r0.shape[0], dtype=bool)
    idx = np.asarray(state.active, dtype=int)
    inactive[idx] = False
    is_global = pd_ok and bool(np.all(np.abs(r0[inactive]) < lam)) if lam > 0 else pd_ok
    return Breakpoint(
        lam=lam,
        beta=state.beta.copy(),
        active=tuple(state.active),
        is_global=is_global,
    )


def ct_lars(
    design: StandardizedDesign,
    rule: ThresholdRule,
    *,
    max_steps: int | None = None,
    lambda_floor: float | None = None,
    tol: float = 1e-12,
) -> SolutionPath:
    """Covariance-thresholded lasso path for a standardized design.

    Builds the sample covariance, applies ``rule`` off-diagonal, and runs the
    modified LARS.  Defaults: ``max_steps = 8*min(n,p) + p`` and
    ``lambda_floor = 1e-8 * lambda_max``.
    """
    cov_nu = apply_threshold(sample_covariance(design), rule)
    if max_steps is None:
        max_steps = 8 * min(design.n, design.p) + design.p
    return solve_path_gram(
        cov_nu.entries,
        design.xty(),
        rule=rule,
        max_steps=max_steps,
        lambda_floor=lambda_floor,
        tol=tol,
    )


def coefficients_at(path: SolutionPath, lam: float, *, clamp: bool = False) -> np.ndarray:
    """Coefficients at penalty ``lam``, interpolating linearly between knots.

    Above the first knot the solution is all-zero; below the last knot a
    :class:`LambdaBelowPath` error is raised unless ``clamp`` is set, in which
    case the final knot's coefficients are returned.
    """
    bps = path.breakpoints
    if lam >= bps[0].lam:
        return np.zeros_like(bps[0].beta)
    if lam < bps[-1].lam:
        if not clamp:
            raise LambdaBelowPath(
                f"lambda={lam} below computed path end {bps[-1].lam}"
            )
        return bps[-1].beta.copy()
    lams = np.array([bp.lam for bp in bps])
    # first index with knot lambda <= lam; lams is strictly decreasing
    k = int(np.searchsorted(-lams, -lam, side="left"))
    if bps[k].lam == lam:
        return bps[k].beta.copy()
    hi, lo = bps[k - 1], bps[k]
    t = (hi.lam - lam) / (hi.lam - lo.lam)
    return hi.beta + t * (lo.beta - hi.beta)


def oracle_solve(
    design: StandardizedDesign,
    rule: ThresholdRule,
    lam: float,
    *,
    max_iters: int = 100_000,
    tol: float = 1e-10,
) -> np.ndarray:
    """Cyclic coordinate descent on the thresholded-covariance objective.

    Independent of the path solver; intended as a cross-check on positive
    semi-definite instances.  Each sweep applies the closed-form univariate
    update ``beta_j <- S(c_j + s_jj beta_j, lam) / s_jj`` until the largest
    coefficient change falls below ``tol``.
    """
    cov_nu = apply_threshold(sample_covariance(design), rule)
    return oracle_solve_gram(cov_nu.entries, design.xty(), lam, max_iters=max_iters, tol=tol)


def oracle_solve_gram(
    sigma: np.ndarray,
    xty: np.ndarray,
    lam: float,
    *,
    max_iters: int = 100_000,
    tol: float = 1e-10,
) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    xty = np.asarray(xty, dtype=float)
    p = xty.shape[0]
    diag = np.diagonal(sigma)
    if np.any(diag <= 0.0):
        raise IndefiniteMatrix("gram matrix has a non-positive diagonal entry")

    beta = np.zeros(p)
    grad = xty.copy()  # residual correlations xty - sigma @ beta
    for _ in range(max_iters):
        max_change = 0.0
        for j in range(p):
            old = beta[j]
            z = grad[j] + diag[j] * old
            new = np.sign(z) * max(abs(z) - lam, 0.0) / diag[j]
            if new != old:
                grad -= (new - old) * sigma[:, j]
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        if not np.isfinite(max_change) or np.max(np.abs(beta)) > 1e10:
            raise IndefiniteMatrix("coordinate descent diverged")
        if max_change < tol:
            return beta
    raise NotConverged(f"coordinate descent did not converge in {max_iters} sweeps")
