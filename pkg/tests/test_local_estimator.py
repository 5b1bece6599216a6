import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angledim.calibration import CacheEntry, CalibrationCache, build_cache
from angledim.errors import CalibrationMismatchError, ConfigurationError
from angledim.local_estimator import (
    LocalConfig,
    default_k,
    discriminant_thresholds,
    estimate_basic,
    estimate_discriminant,
    estimate_kernel,
    estimate_local,
)
from angledim.manifolds import generate
from angledim.moments import beta, moment_table, sigma_sq
from conftest import random_rotation

TABLE = moment_table(20)


def _single_point_cache(k, d_max, value=0.0):
    return CalibrationCache(k=k, entries={d: CacheEntry(d, np.array([value]), 0) for d in range(1, d_max + 1)})


class TestDefaultK:
    @pytest.mark.parametrize("n,k", [(2500, 34), (10, 10), (100000, 50), (2, 3), (3, 5)])
    def test_values(self, n, k):
        assert default_k(n) == k

    def test_floor_at_two(self):
        assert default_k(2) >= 2

    def test_rejects_tiny(self):
        with pytest.raises(ConfigurationError):
            default_k(1)


class TestBasic:
    @pytest.mark.parametrize("d", range(1, 21))
    def test_fixed_points(self, d):
        assert estimate_basic(beta(d), TABLE) == d

    def test_near_beta2(self):
        assert estimate_basic(0.82, TABLE) == 2

    def test_scan_for_one_tenth(self):
        # brute-force scan of |beta(d) - 0.1| over d = 1..20
        expected = min(range(1, 21), key=lambda d: (abs(beta(d) - 0.1), d))
        assert expected == 11
        assert estimate_basic(0.10, TABLE) == expected

    def test_zero_maps_to_dmax(self):
        assert estimate_basic(0.0, TABLE) == 20
        assert estimate_basic(0.0, TABLE, d_max=7) == 7

    def test_tie_goes_to_smaller(self):
        mid = 0.5 * (beta(4) + beta(5))
        assert estimate_basic(mid, TABLE) == 4

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0, math.pi**2 / 4), b=st.floats(0, math.pi**2 / 4))
    def test_monotone_nonincreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert estimate_basic(lo, TABLE) >= estimate_basic(hi, TABLE)


class TestDiscriminant:
    def test_largest_statistic(self):
        assert estimate_discriminant(beta(1), TABLE) == 1

    def test_beta5(self):
        eta = discriminant_thresholds(TABLE)
        assert eta[6] <= beta(5) < eta[5]
        assert estimate_discriminant(beta(5), TABLE) == 5

    def test_zero(self):
        assert estimate_discriminant(0.0, TABLE) == 20

    def test_threshold_formula(self):
        eta = discriminant_thresholds(TABLE)
        s3, s4 = math.sqrt(sigma_sq(3)), math.sqrt(sigma_sq(4))
        assert eta[3] == pytest.approx(beta(3) + s3 / (s3 + s4) * (beta(2) - beta(3)), rel=1e-15)

    def test_thresholds_interleave_betas(self):
        eta = discriminant_thresholds(TABLE)
        for d in range(2, 21):
            assert beta(d) < eta[d] < beta(d - 1)

    @pytest.mark.parametrize("d", range(1, 21))
    def test_fixed_points(self, d):
        assert estimate_discriminant(beta(d), TABLE) == d


class TestKernel:
    def test_single_point_cache_reduces_to_basic(self):
        k = 34
        cache = _single_point_cache(k, 20)
        for u in np.linspace(0.0, math.pi**2 / 4, 400):
            assert estimate_kernel(u, k, cache, TABLE) == estimate_basic(u, TABLE)

    def test_matching_dimension_wins(self):
        k = 34
        cache = build_cache(10, k, m=500, seed=3)
        assert estimate_kernel(beta(7), k, cache, moment_table(10)) == 7

    def test_far_tail_does_not_underflow_to_d1(self):
        k = 34
        cache = build_cache(5, k, m=200, seed=1)
        # Far from every class; log densities still rank the nearest beta first.
        assert estimate_kernel(0.0, k, cache, moment_table(5)) == 5

    def test_k_mismatch(self):
        cache = _single_point_cache(20, 5)
        with pytest.raises(CalibrationMismatchError):
            estimate_kernel(0.3, 34, cache, moment_table(5))

    def test_missing_dimension(self):
        cache = _single_point_cache(34, 3)
        with pytest.raises(CalibrationMismatchError):
            estimate_kernel(0.3, 34, cache, moment_table(5))


class TestEstimateLocal:
    def test_affine_three_plane(self):
        cloud = generate("M2", 2500, seed=11)
        center = cloud.points.mean(axis=0)
        est = estimate_local(cloud, center)
        assert est.d_hat == 3
        assert est.k == 34

    def test_sphere_s9(self):
        hits = 0
        for seed in range(20):
            cloud = generate("M1", 2500, seed=seed)
            hits += estimate_local(cloud, cloud.points[0], center_index=0).d_hat in (8, 9, 10)
        assert hits >= 18

    def test_two_orthogonal_neighbours(self):
        est = estimate_local([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], np.zeros(3), LocalConfig(k=2))
        assert est.u_value == pytest.approx(0.0, abs=1e-30)
        assert est.d_hat == 3

    def test_kernel_needs_cache(self):
        with pytest.raises(CalibrationMismatchError):
            estimate_local(np.eye(5), np.zeros(5), LocalConfig(k=3, method="kernel"))

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            LocalConfig(method="mode")

    def test_disc_alias(self):
        assert LocalConfig(method="disc").method == "discriminant"

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.01, 100.0))
    def test_isometry_and_scale_invariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((300, 4))
        center = pts[0]
        q = random_rotation(rng, 4)
        shift = rng.standard_normal(4)
        moved = (scale * (pts - center)) @ q.T + shift
        a = estimate_local(pts, center)
        b = estimate_local(moved, moved[0])
        assert a.d_hat == b.d_hat
        assert b.u_value == pytest.approx(a.u_value, abs=1e-10)
