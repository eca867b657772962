import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import smirnov

from cadro.bounds import (
    BoundKind,
    GammaMode,
    MeanBoundSpec,
    Projections,
    gamma_value,
    hoeffding_bound,
    hoeffding_radius,
    ks_onesided_sf,
    mean_bound,
    ordered_mean_bound,
    project_sample,
)
from cadro.core import Dataset, ProbVector, RngStream, sample_dataset


def proj(eta, v):
    v = np.asarray(v, float)
    return Projections(np.asarray(eta, float), float(v.max()), float(v.min()))


class TestProjectSample:
    def test_basic(self):
        pr = project_sample(Dataset([0, 0, 1, 1], 2), [0.0, 1.0])
        assert pr.eta.tolist() == [0, 0, 1, 1] and pr.eta_bar == 1 and pr.rg == 1

    def test_constant(self):
        pr = project_sample(Dataset([0, 2, 1], 3), [3.0, 3.0, 3.0])
        assert pr.eta.tolist() == [3, 3, 3] and pr.rg == 0

    def test_range_uses_all_coordinates(self):
        pr = project_sample(Dataset([2], 3), [-1.0, 2.0, 0.0])
        assert pr.eta.tolist() == [0] and pr.eta_bar == 2 and pr.rg == 3

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project_sample(Dataset([0], 3), [1.0, 2.0])


class TestHoeffding:
    def test_radius_values(self):
        assert hoeffding_radius(1000, 0.01) == pytest.approx(math.sqrt(math.log(100) / 2000), rel=1e-12)
        assert hoeffding_radius(1000, 0.01) == pytest.approx(0.047985, abs=1e-6)
        assert hoeffding_radius(1, 0.1) == 1.0
        assert hoeffding_radius(10, 1 - 1e-12) < 1e-5

    def test_bound_capped(self):
        assert hoeffding_bound(proj([0, 0, 1, 1], [0, 1]), 0.5, 4, 0.01) == 1.0

    def test_constant_direction(self):
        assert hoeffding_bound(proj([3, 3], [3, 3]), 3.0, 2, 0.05) == 3.0

    def test_large_sample(self):
        val = hoeffding_bound(proj([0, 1], [0, 1]), 0.5, 10**6, 0.5)
        assert val == pytest.approx(0.5 + math.sqrt(math.log(2) / 2e6), rel=1e-12)
        assert val == pytest.approx(0.500589, abs=1e-6)

    def test_empty(self):
        with pytest.raises(ValueError):
            hoeffding_bound(proj([], [0, 1]), 0.0, 1, 0.1)


class TestGamma:
    def test_asymptotic(self):
        assert gamma_value(200, 0.01) == pytest.approx(math.sqrt(math.log(100) / 400), rel=1e-12)
        assert gamma_value(200, 1 - 1e-12) < 1e-6
        assert gamma_value(1, 0.01) == 1.0

    @pytest.mark.parametrize("m, d", [(1, 0.3), (7, 0.2), (50, 0.15), (200, 0.1), (3000, 0.02)])
    def test_birnbaum_tingey_matches_scipy(self, m, d):
        assert ks_onesided_sf(m, d) == pytest.approx(smirnov(m, d), rel=1e-9, abs=1e-15)

    def test_exact_is_smallest_admissible(self):
        g = gamma_value(200, 0.01, GammaMode.EXACT_KS)
        assert 0 < g <= gamma_value(200, 0.01) + 0.05
        assert ks_onesided_sf(200, g) <= 0.01
        assert ks_onesided_sf(200, g - 2e-10) > 0.01

    def test_exact_monte_carlo(self):
        """Monte-Carlo oracle: one-sided KS tail at the returned gamma."""
        m, beta, reps = 200, 0.01, 100_000
        g = gamma_value(m, beta, GammaMode.EXACT_KS)
        rng = np.random.default_rng(11)
        hits = 0
        grid = np.arange(1, m + 1) / m
        for chunk in range(10):
            u = np.sort(rng.random((reps // 10, m)), axis=1)
            d_plus = np.max(grid - u, axis=1)
            hits += int(np.sum(d_plus >= g))
        frac = hits / reps
        assert frac <= beta + 3 * math.sqrt(beta * (1 - beta) / reps)


class TestOrdered:
    def test_hand_value(self):
        assert ordered_mean_bound(proj([1, 0, 1, 0], [0, 1]), 4, 0.01, gamma=0.3) == pytest.approx(0.8)

    def test_zero_gamma_is_mean(self):
        assert ordered_mean_bound(proj([0.2, 0.5, 0.1], [0, 1]), 3, 0.5, gamma=0.0) == pytest.approx(0.8 / 3)
        val = ordered_mean_bound(proj([0.2, 0.5, 0.1], [0, 1]), 3, 1 - 1e-15)
        assert val == pytest.approx(0.8 / 3, abs=1e-6)

    def test_gamma_one_is_max(self):
        assert ordered_mean_bound(proj([0.2, 0.5], [0, 1, 4]), 2, 0.1, gamma=1.0) == 4.0
        assert ordered_mean_bound(proj([0.2], [0, 1, 4]), 1, 0.01) == 4.0

    def test_empty(self):
        with pytest.raises(ValueError):
            ordered_mean_bound(proj([], [0, 1]), 1, 0.1)

    @settings(max_examples=300)
    @given(
        st.lists(st.integers(0, 5), min_size=1, max_size=60),
        st.lists(st.floats(-10, 10), min_size=6, max_size=6),
        st.floats(0, 1),
    )
    def test_dominates_empirical_mean_and_is_sandwiched(self, outcomes, v, g):
        pr = project_sample(Dataset(outcomes, 6), v)
        val = ordered_mean_bound(pr, pr.m, 0.1, gamma=g)
        assert val >= pr.mean() - 1e-9
        assert min(v) - 1e-9 <= val <= max(v) + 1e-12
        h = hoeffding_bound(pr, None, pr.m, 0.1)
        assert pr.mean() - 1e-9 <= h <= max(v) + 1e-12

    def test_monotone_in_beta(self, rng):
        for _ in range(50):
            v = rng.normal(size=8)
            pr = project_sample(Dataset(rng.integers(0, 8, size=40), 8), v)
            for mode in GammaMode:
                vals = [ordered_mean_bound(pr, pr.m, b, mode) for b in np.linspace(0.01, 0.99, 25)]
                assert np.all(np.diff(vals) <= 1e-12)


@pytest.mark.parametrize("kind", list(BoundKind))
def test_coverage_of_mean_bounds(kind):
    """Fraction of resamples where the bound falls below the true mean."""
    p = ProbVector([0.5, 0.2, 0.2, 0.1])
    v = np.array([0.0, 1.0, 3.0, 10.0])
    truth = p.weights @ v
    spec = MeanBoundSpec(kind=kind, beta=0.1)
    misses = 0
    for rep in range(2000):
        d = sample_dataset(p, 50, RngStream(3, rep).generator())
        misses += mean_bound(spec, d, v) < truth
    assert misses / 2000 <= 0.1 + 0.03


def test_spec_validation():
    with pytest.raises(ValueError):
        MeanBoundSpec(beta=0.0)
    with pytest.raises(ValueError):
        MeanBoundSpec(beta=1.0)
