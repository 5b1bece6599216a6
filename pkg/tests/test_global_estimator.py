import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from angledim.errors import CalibrationMismatchError, ConfigurationError
from angledim.global_estimator import (
    GlobalConfig,
    centrality_scores,
    default_c,
    estimate_global,
    mean_angle_discard,
    median_dimension,
    partition,
    pick_centers,
    rank_weight,
)
from angledim.local_estimator import LocalConfig, LocalEstimate, estimate_local
from angledim.manifolds import generate
from conftest import random_rotation

HALF_PI = math.pi / 2


def _est(idx, deviation, d_hat=2):
    return LocalEstimate(d_hat=d_hat, u_value=0.0, mean_angle=HALF_PI + deviation, k=5, center_index=idx)


class TestDefaultC:
    @pytest.mark.parametrize("n,c", [(2500, 16), (3, 2), (2, 1)])
    def test_values(self, n, c):
        assert default_c(n) == c


class TestCentrality:
    def test_weights_at_n5(self):
        assert rank_weight(3, 5, "printed") == pytest.approx(0.1)
        assert rank_weight(3, 5) == pytest.approx(0.4)
        assert rank_weight(1, 5, "printed") == pytest.approx(0.5)
        assert rank_weight(1, 5) == pytest.approx(0.0)

    def test_middle_point_of_line(self):
        # ranks 4,1,3,2 -> weights 0.25, 0, 0.5, 0.25
        scores = centrality_scores([[10.0], [0.0], [5.0], [2.0]])
        np.testing.assert_allclose(scores, [0.25, 0.0, 0.5, 0.25])
        assert int(np.argmax(scores)) == 2

    def test_odd_count_ties_resolve_to_lower_index(self):
        scores = centrality_scores([[10.0], [0.0], [5.0]])
        np.testing.assert_allclose(scores, [1 / 3, 0.0, 1 / 3])
        assert pick_centers([[10.0], [0.0], [5.0]], 1) == [0]

    def test_printed_weight_prefers_extremes(self):
        scores = centrality_scores([[10.0], [0.0], [5.0], [2.0]], weight="printed")
        assert int(np.argmax(scores)) == 1

    def test_sum_over_coordinates(self):
        pts = np.array([[0.0, 2.0], [1.0, 0.0], [2.0, 1.0]])
        # ranks: col0 -> 1,2,3 ; col1 -> 3,1,2
        expected = rank_weight(np.array([1, 2, 3]), 3) + rank_weight(np.array([3, 1, 2]), 3)
        np.testing.assert_allclose(centrality_scores(pts), expected)


class TestPickCenters:
    def test_single_subsample(self, rng):
        pts = rng.standard_normal((51, 3))
        (c,) = pick_centers(pts, 1)
        assert c == int(np.argmax(centrality_scores(pts)))

    def test_every_point_its_own_subsample(self, rng):
        pts = rng.standard_normal((7, 2))
        assert sorted(pick_centers(pts, 7, np.random.default_rng(0))) == list(range(7))

    def test_equal_split(self):
        chunks = partition(100, 4, np.random.default_rng(1))
        assert [len(c) for c in chunks] == [25, 25, 25, 25]
        assert sorted(np.concatenate(chunks).tolist()) == list(range(100))

    def test_too_many_centers(self):
        with pytest.raises(ConfigurationError):
            pick_centers(np.zeros((3, 2)), 4)


class TestDiscard:
    def test_identity(self):
        ests = [_est(i, 0.1 * i) for i in range(4)]
        kept, dropped = mean_angle_discard(ests, 0.0)
        assert kept == ests and dropped == []

    def test_drops_largest_deviation(self):
        ests = [_est(i, dev) for i, dev in enumerate([0.01, 0.5, 0.02, 0.3])]
        kept, dropped = mean_angle_discard(ests, 0.25)
        assert [e.center_index for e in kept] == [0, 2, 3]
        assert dropped == [(1, pytest.approx(0.5))]

    def test_ceil_rule(self):
        ests = [_est(i, dev) for i, dev in enumerate([0.2, -0.01, 0.3])]
        kept, _ = mean_angle_discard(ests, 0.5)
        assert [e.center_index for e in kept] == [1]

    def test_tie_keeps_lower_index(self):
        ests = [_est(i, 0.4) for i in range(4)]
        kept, _ = mean_angle_discard(ests, 0.25)
        assert [e.center_index for e in kept] == [0, 1, 2]

    def test_float_product_not_overcounted(self):
        ests = [_est(i, 0.01 * i) for i in range(30)]
        kept, _ = mean_angle_discard(ests, 0.1)
        assert len(kept) == 27

    def test_all_discarded(self):
        with pytest.raises(ConfigurationError):
            mean_angle_discard([_est(0, 0.1)], 0.9)


class TestMedian:
    def test_odd(self):
        assert median_dimension([2, 2, 3]) == 2

    def test_even_rounds_down(self):
        assert median_dimension([2, 3]) == 2
        assert median_dimension([4, 2, 9, 5]) == 4

    @given(st.lists(st.integers(1, 50), min_size=1, max_size=30))
    def test_between_extremes(self, values):
        assert min(values) <= median_dimension(values) <= max(values)


class TestEstimateGlobal:
    def test_swiss_roll(self):
        est = estimate_global(generate("M7", 2500, seed=4), seed=4)
        assert est.d_hat == 2
        assert est.k == 34 and est.c == 16
        assert len(est.per_center) == 16

    def test_single_center_equals_local(self, rng):
        pts = rng.standard_normal((400, 5))
        g = estimate_global(pts, GlobalConfig(c=1), seed=0)
        (idx,) = pick_centers(pts, 1)
        loc = estimate_local(pts, pts[idx], center_index=idx)
        assert g.d_hat == loc.d_hat
        assert g.per_center[0] == loc

    def test_deterministic_and_thread_independent(self):
        cloud = generate("M5", 800, seed=2)
        a = estimate_global(cloud, seed=9)
        b = estimate_global(cloud, seed=9, threads=4)
        assert a.to_dict() == b.to_dict()

    def test_discard_reported(self):
        cloud = generate("M1", 1000, seed=1)
        est = estimate_global(cloud, GlobalConfig(c=8, discard_fraction=0.25), seed=1)
        assert len(est.discarded) == 2
        kept = [e for e in est.per_center if e.center_index not in {i for i, _ in est.discarded}]
        assert est.d_hat == median_dimension(e.d_hat for e in kept)

    def test_kernel_requires_cache(self):
        with pytest.raises(CalibrationMismatchError):
            estimate_global(np.random.default_rng(0).standard_normal((100, 3)), GlobalConfig(local=LocalConfig(method="kernel")))

    @pytest.mark.parametrize("manifold", ["M2", "M5", "M7"])
    def test_rotation_stability(self, manifold):
        stable = 0
        trials = 10
        for t in range(trials):
            cloud = generate(manifold, 2500, seed=100 + t)
            base = estimate_global(cloud, seed=t).d_hat
            rng = np.random.default_rng(t)
            same = all(
                estimate_global(cloud.points @ random_rotation(rng, cloud.m).T, seed=t).d_hat == base
                for _ in range(5)
            )
            stable += same
        assert stable >= 0.9 * trials
