import itertools

import numpy as np
import pytest

from ctlasso import (
    CovMatrix,
    bootstrap_se_of_median,
    make_sigma,
    rpe,
    selection_metrics,
    sign_agreement,
)
from ctlasso.exceptions import DegenerateTruth
from ctlasso.simulation import SigmaSpec


class TestSelectionMetrics:
    def test_perfect_support(self):
        star = np.array([1.0, -2.0, 0.0, 0.0])
        m = selection_metrics(star.copy(), star)
        assert (m.tp, m.fp) == (2, 0)
        assert m.g == pytest.approx(1.0)

    def test_zero_estimate(self):
        star = np.array([1.0, 0.0, 0.0])
        m = selection_metrics(np.zeros(3), star)
        assert m.sensitivity == 0.0
        assert m.g == 0.0

    def test_direct_arithmetic(self):
        # s=10, p=100, tp=6, fp=20
        star = np.zeros(100)
        star[:10] = 1.0
        hat = np.zeros(100)
        hat[:6] = 1.0
        hat[10:30] = 1.0
        m = selection_metrics(hat, star)
        assert (m.tp, m.fp) == (6, 20)
        assert m.sensitivity == pytest.approx(0.6)
        assert m.specificity == pytest.approx(1 - 20 / 90)
        assert m.g == pytest.approx(np.sqrt(0.6 * (1 - 20 / 90)))

    def test_degenerate_truth(self):
        with pytest.raises(DegenerateTruth):
            selection_metrics(np.zeros(3), np.zeros(3))
        with pytest.raises(DegenerateTruth):
            selection_metrics(np.zeros(3), np.ones(3))

    def test_permutation_invariance(self, rng):
        star = np.array([2.0, 0.0, -1.0, 0.0, 0.5, 0.0])
        hat = np.array([1.0, 0.3, 0.0, 0.0, 0.2, 0.0])
        g0 = selection_metrics(hat, star).g
        for _ in range(10):
            perm = rng.permutation(6)
            assert selection_metrics(hat[perm], star[perm]).g == pytest.approx(g0)

    def test_g_bounds(self, rng):
        star = np.zeros(12)
        star[:4] = 1.0
        for _ in range(50):
            hat = rng.choice([0.0, 1.0], size=12)
            m = selection_metrics(hat, star)
            assert 0.0 <= m.g <= 1.0
            assert (m.g == 0.0) == (m.tp == 0 or m.fp == 8)


class TestRpe:
    def test_exact_recovery(self):
        star = np.array([1.0, 2.0])
        assert rpe(star.copy(), star, CovMatrix(np.eye(2)), 3.0) == 0.0

    def test_unit_basis_error(self):
        star = np.zeros(3)
        hat = np.array([1.0, 0.0, 0.0])
        assert rpe(hat, star, CovMatrix(np.eye(3)), 1.0) == pytest.approx(1.0)

    def test_ar_quadratic_form(self):
        sigma = make_sigma(SigmaSpec.ar(0.5), 3)
        hat = np.array([1.0, 1.0, 0.0])
        star = np.zeros(3)
        assert rpe(hat, star, sigma, 2.0) == pytest.approx((1 + 1 + 2 * 0.5) / 4)

    def test_nonnegative_on_psd(self, rng):
        sigma = make_sigma(SigmaSpec.ar(0.7), 6)
        for _ in range(25):
            d = rng.normal(0, 1, 6)
            assert rpe(d, np.zeros(6), sigma, 1.5) >= 0.0


class TestSignAgreement:
    def test_identical(self):
        v = np.array([1.0, -2.0, 0.0])
        assert sign_agreement(v.copy(), v)

    def test_flipped_sign(self):
        assert not sign_agreement(np.array([1.0, 2.0]), np.array([1.0, -2.0]))

    def test_extra_nonzero(self):
        assert not sign_agreement(np.array([1.0, 0.1]), np.array([1.0, 0.0]))

    def test_magnitude_irrelevant(self):
        assert sign_agreement(np.array([0.001, -5.0]), np.array([10.0, -0.2]))


class TestBootstrapSeOfMedian:
    def test_constant_vector(self):
        assert bootstrap_se_of_median(np.full(7, 3.5), 200, seed=1) == 0.0

    def test_two_point_exhaustive_enumeration(self):
        # all 4 equiprobable resamples of (0, 1): medians 0, .5, .5, 1
        medians = [np.median([a, b]) for a, b in itertools.product([0.0, 1.0], repeat=2)]
        exact_sd = float(np.std(medians))
        est = bootstrap_se_of_median(np.array([0.0, 1.0]), 40_000, seed=2)
        assert est == pytest.approx(exact_sd, abs=0.01)

    def test_seeded_repeat_identical(self, rng):
        v = rng.normal(0, 1, 30)
        a = bootstrap_se_of_median(v, 500, seed=11)
        b = bootstrap_se_of_median(v, 500, seed=11)
        assert a == b

    def test_validation(self):
        with pytest.raises(ValueError):
            bootstrap_se_of_median(np.array([]), 10, 0)
        with pytest.raises(ValueError):
            bootstrap_se_of_median(np.array([1.0]), 1, 0)
