import numpy as np
import pytest

from angledim.angle_kernel import knn
from angledim.errors import ConfigurationError
from angledim.manifolds import MANIFOLDS, generate, membership_residual

TABLE = {
    "M1": (9, 10), "M2": (3, 5), "M3": (4, 6), "M4": (4, 8), "M5": (2, 3), "M6": (6, 36), "M7": (2, 3),
    "M8": (12, 72), "M9": (20, 20), "M10": (9, 10), "M11": (2, 3), "M12": (10, 10), "M13": (1, 10),
}
IMPLICIT = ["M1", "M2", "M5", "M7", "M9", "M10", "M11", "M13"]


def test_dimension_pairs():
    assert {k: (s.d, s.m) for k, s in MANIFOLDS.items()} == TABLE


@pytest.mark.parametrize("mid", list(TABLE))
def test_shape_and_determinism(mid):
    a = generate(mid, 200, seed=5)
    b = generate(mid, 200, seed=5)
    assert a.points.shape == (200, TABLE[mid][1])
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, generate(mid, 200, seed=6).points)


@pytest.mark.parametrize("mid", IMPLICIT)
def test_points_lie_on_manifold(mid):
    cloud = generate(mid, 2000, seed=1)
    assert np.max(membership_residual(mid, cloud.points)) <= 1e-10


def test_sphere_norms():
    np.testing.assert_allclose(np.linalg.norm(generate("M1", 500, seed=0).points, axis=1), 1.0, atol=1e-12)


def test_cube_box():
    pts = generate("M9", 500, seed=0).points
    assert pts.min() >= 0.0 and pts.max() <= 1.0


def test_sphere_residual_off_manifold():
    x = np.zeros(10)
    x[0] = 1.1
    assert membership_residual("M1", x) == pytest.approx(0.1)


def test_swiss_roll_residual_detects_offset():
    p = generate("M7", 1, seed=0).points[0]
    assert membership_residual("M7", p) <= 1e-12
    assert membership_residual("M7", p + np.array([0.3, 0.0, 0.0])) > 1e-3


def test_mobius_residual_detects_offset():
    p = generate("M11", 1, seed=0).points[0]
    assert membership_residual("M11", p + np.array([0.0, 0.0, 0.2])) > 1e-3


def test_affine_constraints():
    pts = generate("M2", 300, seed=2).points
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    assert sv[2] > 1.0 and sv[3] <= 1e-10 * sv[0]


@pytest.mark.parametrize("mid", ["M3", "M4", "M6", "M8", "M12"])
def test_no_implicit_form(mid):
    assert membership_residual(mid, np.zeros(TABLE[mid][1])) is None


def test_local_pca_on_affine(rng):
    cloud = generate("M2", 2500, seed=8)
    i = int(rng.integers(cloud.n))
    nb = knn(cloud, cloud.points[i], 50)
    sv = np.linalg.svd(nb.vectors - nb.vectors.mean(axis=0), compute_uv=False)
    assert int(np.sum(sv > 1e-8)) == 3


@pytest.mark.parametrize("mid", ["M4", "M6", "M8"])
def test_parametrised_manifolds_have_full_rank_jacobian(mid):
    """Finite-difference Jacobian of the sampler map has rank d."""
    spec = MANIFOLDS[mid]

    class Fixed:
        def __init__(self, p):
            self.p = p

        def uniform(self, lo, hi, size):
            return lo + (hi - lo) * self.p.reshape(size)

    p0 = np.random.default_rng(0).uniform(0.1, 0.9, spec.d)
    base = spec.sampler(Fixed(p0[None, :]), 1)[0]
    jac = []
    for j in range(spec.d):
        q = p0.copy()
        q[j] += 1e-6
        jac.append((spec.sampler(Fixed(q[None, :]), 1)[0] - base) / 1e-6)
    assert np.linalg.matrix_rank(np.array(jac), tol=1e-4) == spec.d


def test_unknown_id():
    with pytest.raises(ConfigurationError):
        generate("M14", 10)


def test_lowercase_id():
    assert generate("m5", 3, seed=0).m == 3
