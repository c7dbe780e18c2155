"""Distance, confidence-range and area-metric checks against closed-form
and hand-integrated oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmuq.distributions import FAMILIES, ModelFamily
from mmuq.metrics import (
    CoarseGridError,
    EmpiricalCdf,
    area_validation_metric,
    avg_mean_square_distance,
    confidence_range,
    default_sigma0_grid,
)
from mmuq.propagation import DistributionEnsemble

NORMAL = FAMILIES.index(ModelFamily.NORMAL)


def normal_ensemble(mus, sigma=1.0):
    mus = np.asarray(mus, dtype=float)
    thetas = np.column_stack([mus, np.full_like(mus, sigma)])
    return DistributionEnsemble(np.full(mus.size, NORMAL), thetas)


class TestAvgMeanSquareDistance:
    def test_self_ensemble_is_zero(self):
        ens = normal_ensemble([34.782] * 5, sigma=4.0)
        truth = (ModelFamily.NORMAL, np.array([34.782, 4.0]))
        assert avg_mean_square_distance(ens, truth) == 0.0

    @pytest.mark.parametrize("mu", [0.0, 0.4, 1.3])
    def test_gaussian_shift_closed_form(self, mu):
        # for unit normals shifted by mu:
        #   integral (phi(x) - phi(x - mu))^2 dx = (1 - exp(-mu^2/4)) / sqrt(pi)
        # so delta = half of that
        ens = normal_ensemble([0.0])
        truth = (ModelFamily.NORMAL, np.array([mu, 1.0]))
        grid = np.linspace(-12.0, 12.0 + mu, 4001)
        expected = 0.5 * (1.0 - np.exp(-(mu**2) / 4.0)) / np.sqrt(np.pi)
        assert avg_mean_square_distance(ens, truth, grid) == pytest.approx(
            expected, abs=1e-8
        )

    def test_duplicating_members_leaves_delta_unchanged(self):
        mus = [33.0, 35.0, 36.5]
        truth = (ModelFamily.NORMAL, np.array([34.782, 4.0]))
        grid = default_sigma0_grid()
        a = avg_mean_square_distance(normal_ensemble(mus, 4.0), truth, grid)
        b = avg_mean_square_distance(normal_ensemble(mus + mus, 4.0), truth, grid)
        assert a == pytest.approx(b, rel=1e-12)

    def test_coarse_grid_raises(self):
        # narrow densities on an 11-point grid over 50 ksi are unresolved
        ens = normal_ensemble([34.0], sigma=0.3)
        truth = (ModelFamily.NORMAL, np.array([35.0, 0.3]))
        with pytest.raises(CoarseGridError):
            avg_mean_square_distance(ens, truth, np.linspace(15.0, 65.0, 11))


class TestConfidenceRange:
    def test_degenerate_sample_is_zero(self):
        cdf = EmpiricalCdf.from_samples(np.full(50, 3.25))
        assert confidence_range(cdf) == 0.0

    def test_standard_normal_reference_value(self, rng):
        cdf = EmpiricalCdf.from_samples(rng.standard_normal(10**6))
        assert confidence_range(cdf) == pytest.approx(2.0 * 1.959964, abs=0.02)

    def test_affine_equivariance(self, rng):
        y = rng.standard_normal(500)
        base = confidence_range(EmpiricalCdf.from_samples(y))
        scaled = confidence_range(EmpiricalCdf.from_samples(-2.5 * y + 7.0))
        assert scaled == pytest.approx(2.5 * base, rel=1e-9)

    def test_translation_invariance(self, rng):
        y = rng.standard_normal(200)
        a = confidence_range(EmpiricalCdf.from_samples(y))
        b = confidence_range(EmpiricalCdf.from_samples(y + 123.4))
        assert a == pytest.approx(b, abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            confidence_range(EmpiricalCdf.from_samples(np.arange(39)))


class TestAreaValidationMetric:
    def test_step_at_truth_is_zero(self):
        cdf = EmpiricalCdf.from_samples(np.full(10, 5.0))
        assert area_validation_metric(cdf, 5.0) == 0.0

    @pytest.mark.parametrize("c", [0.7, -1.3])
    def test_step_offset_by_c(self, c):
        cdf = EmpiricalCdf.from_samples(np.full(10, 5.0 + c))
        assert area_validation_metric(cdf, 5.0) == pytest.approx(abs(c), rel=1e-12)

    def test_symmetric_two_point_cdf(self):
        # segments [t-1, t): |1/2 - 0| and [t, t+1): |1/2 - 1| integrate to 1
        cdf = EmpiricalCdf.from_samples([4.0, 6.0])
        assert area_validation_metric(cdf, 5.0) == pytest.approx(1.0, rel=1e-12)

    @given(
        values=st.lists(st.floats(-50, 50), min_size=1, max_size=60),
        truth=st.floats(-60, 60),
    )
    @settings(max_examples=100, deadline=None)
    def test_equals_mean_absolute_deviation(self, values, truth):
        # independent identity: area between an empirical CDF and the step
        # at t equals the sample mean of |y - t|
        cdf = EmpiricalCdf.from_samples(values)
        d = area_validation_metric(cdf, truth)
        assert d >= 0.0
        assert d == pytest.approx(np.mean(np.abs(np.asarray(values) - truth)), abs=1e-9)

    def test_zero_only_when_all_mass_at_truth(self, rng):
        y = rng.normal(0.0, 1.0, 100)
        assert area_validation_metric(EmpiricalCdf.from_samples(y), 0.0) > 0.0


class TestEmpiricalCdf:
    def test_from_samples_probabilities(self):
        cdf = EmpiricalCdf.from_samples([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(cdf.values, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(cdf.probs, [1 / 3, 2 / 3, 1.0])

    def test_rejects_unsorted_or_bad_probs(self):
        with pytest.raises(ValueError):
            EmpiricalCdf(values=np.array([2.0, 1.0]), probs=np.array([0.5, 1.0]))
        with pytest.raises(ValueError):
            EmpiricalCdf(values=np.array([1.0, 2.0]), probs=np.array([0.5, 0.9]))
