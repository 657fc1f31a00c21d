import numpy as np
import pytest

from ctlasso import (
    EstimatorSpec,
    Method,
    Termination,
    ThresholdKind,
    ThresholdRule,
    adaptive_lasso_path,
    apply_threshold,
    coefficients_at,
    ct_lars,
    elastic_net_path,
    fit_path,
    kkt_check,
    sample_covariance,
    standardize,
    ust_fit,
    ust_path,
)
from ctlasso.exceptions import ZeroInitialEstimate

from conftest import orthogonal_design, random_design


class TestEstimatorSpec:
    def test_lasso_is_identity_rule(self):
        spec = EstimatorSpec(Method.LASSO)
        assert spec.rule.kind is ThresholdKind.IDENTITY

    def test_lasso_rejects_other_rules(self):
        with pytest.raises(ValueError):
            EstimatorSpec(Method.LASSO, rule=ThresholdRule.soft(0.2))

    def test_ct_lasso_needs_rule(self):
        with pytest.raises(ValueError):
            EstimatorSpec(Method.CT_LASSO)

    def test_lasso_path_identical_to_identity_ct(self, rng):
        d, _ = random_design(rng, 20, 8)
        p1 = fit_path(d, EstimatorSpec(Method.LASSO))
        p2 = ct_lars(d, ThresholdRule.identity())
        assert len(p1.breakpoints) == len(p2.breakpoints)
        for a, b in zip(p1.breakpoints, p2.breakpoints):
            assert a.lam == b.lam
            np.testing.assert_array_equal(a.beta, b.beta)


class TestUst:
    def test_scalar_example(self, rng):
        d = orthogonal_design(rng, p=1)
        r = d.xty()
        lam = abs(r[0]) - 0.2 if abs(r[0]) > 0.2 else 0.0
        got = ust_fit(d, lam)[0]
        assert got == pytest.approx(np.sign(r[0]) * (abs(r[0]) - lam))

    def test_lambda_zero_returns_r(self, rng):
        d, _ = random_design(rng, 20, 6)
        np.testing.assert_array_equal(ust_fit(d, 0.0), d.xty())

    def test_large_lambda_zero_vector(self, rng):
        d, _ = random_design(rng, 20, 6)
        lam = float(np.max(np.abs(d.xty())))
        assert np.all(ust_fit(d, lam) == 0.0)

    def test_ust_path_matches_closed_form(self, rng):
        d, _ = random_design(rng, 25, 9)
        path = ust_path(d)
        for lam in np.geomspace(path.lambda_max, path.lambda_min, 100):
            np.testing.assert_allclose(
                coefficients_at(path, lam, clamp=True), ust_fit(d, lam), atol=1e-10
            )

    def test_ust_equals_complete_thresholding_path(self, rng):
        d, _ = random_design(rng, 18, 7)
        cov = sample_covariance(d)
        numax = float(np.max(np.abs(cov.entries - np.eye(7))))
        ct_path = ct_lars(d, ThresholdRule.hard(min(numax + 1e-9, 1 - 1e-12)))
        u_path = ust_path(d)
        lo = max(ct_path.lambda_min, u_path.lambda_min)
        for lam in np.geomspace(u_path.lambda_max, lo, 50):
            np.testing.assert_allclose(
                coefficients_at(ct_path, lam, clamp=True),
                coefficients_at(u_path, lam, clamp=True),
                atol=1e-10,
            )


class TestAdaptiveLasso:
    def test_gamma_zero_equals_lasso(self, rng):
        d, _ = random_design(rng, 25, 8)
        pa = adaptive_lasso_path(d, 0.0)
        pl = ct_lars(d, ThresholdRule.identity())
        assert len(pa.breakpoints) == len(pl.breakpoints)
        for a, b in zip(pa.breakpoints, pl.breakpoints):
            np.testing.assert_allclose(a.beta, b.beta, atol=1e-10)

    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_orthogonal_closed_form(self, rng, gamma):
        d = orthogonal_design(rng, p=5)
        r = d.xty()
        path = adaptive_lasso_path(d, gamma)
        for lam in np.geomspace(path.lambda_max, path.lambda_min, 12):
            expected = np.sign(r) * np.maximum(np.abs(r) - lam / np.abs(r) ** gamma, 0.0)
            np.testing.assert_allclose(
                coefficients_at(path, lam, clamp=True), expected, atol=1e-10
            )

    def test_p1_direct_value(self):
        # r = 0.8, gamma = 1, lambda = 0.4 -> 0.8 - 0.4/0.8 = 0.3
        x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        y = 0.8 * x[:, 0]
        d = standardize(x, y)
        assert d.xty()[0] == pytest.approx(0.8)
        path = adaptive_lasso_path(d, 1.0)
        assert coefficients_at(path, 0.4, clamp=True)[0] == pytest.approx(0.3, abs=1e-12)

    def test_zero_initial_estimate(self):
        x = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
        y = x[:, 0]  # column 2 exactly orthogonal to y
        d = standardize(x, y)
        with pytest.raises(ZeroInitialEstimate) as exc:
            adaptive_lasso_path(d, 1.0)
        assert exc.value.column == 1


class TestElasticNet:
    def test_lambda2_zero_is_lasso(self, rng):
        d, _ = random_design(rng, 22, 7)
        pe = elastic_net_path(d, 0.0)
        pl = ct_lars(d, ThresholdRule.identity())
        for a, b in zip(pe.breakpoints, pl.breakpoints):
            assert a.lam == pytest.approx(b.lam, abs=1e-10)
            np.testing.assert_allclose(a.beta, b.beta, atol=1e-10)

    def test_large_lambda2_approaches_ust(self, rng):
        # off-diagonals shrink toward zero as lambda2 grows
        d, _ = random_design(rng, 20, 5)
        cov = apply_threshold(sample_covariance(d), ThresholdRule.elastic_net(1e6))
        off = cov.entries[~np.eye(5, dtype=bool)]
        assert np.max(np.abs(off)) < 1e-6

    def test_kkt_against_en_gram(self, rng):
        d, _ = random_design(rng, 30, 10)
        path = elastic_net_path(d, 1.0)
        cov = apply_threshold(sample_covariance(d), ThresholdRule.elastic_net(1.0))
        xty = d.xty()
        for bp in path.breakpoints:
            assert kkt_check(bp.beta, bp.lam, cov, xty, 1e-8).passed

    def test_no_eigenvalue_stop(self):
        # positive-definite gram for lambda2 > 0 even when p > n
        rng = np.random.default_rng(9)
        d, _ = random_design(rng, 12, 30, s=4)
        path = elastic_net_path(d, 0.5)
        assert path.termination is not Termination.EIGENVALUE_STOP
