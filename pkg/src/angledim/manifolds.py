"""Seeded generators for the thirteen benchmark manifolds M1..M13.

Points are drawn uniformly in each manifold's parameter domain (uniform on
the surface for the sphere) without noise. The formulas are documented in
MANIFOLDS.md at the repository root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .angle_kernel import PointCloud
from .calibration import make_rng, sample_uniform_sphere
from .errors import ConfigurationError

__all__ = ["ManifoldSpec", "MANIFOLDS", "get_spec", "generate", "membership_residual"]

# Fixed affine map for M2: x = A p + b with p in [-1, 1]^3.
_AFFINE_A = np.array(
    [
        [1.2, -0.5, 0.0],
        [0.5, 0.0, 0.9],
        [-0.5, -0.2, 1.0],
        [0.4, -0.9, -0.1],
        [1.1, 0.0, -0.3],
    ]
)
_AFFINE_B = np.array([3.0, -1.0, 0.0, 0.0, 8.0])
_AFFINE_NULL = np.linalg.svd(_AFFINE_A)[0][:, 3:]  # orthonormal complement of range(A)


def _sphere(p_rng, n):
    return sample_uniform_sphere(10, n, p_rng)


def _affine(p_rng, n):
    p = p_rng.uniform(-1.0, 1.0, size=(n, 3))
    return p @ _AFFINE_A.T + _AFFINE_B


def _nonlinear_4_6(p_rng, n):
    p0, p1, p2, p3 = p_rng.uniform(0.0, 1.0, size=(4, n))
    return np.column_stack(
        [
            p1**2 * np.cos(2 * np.pi * p0),
            p2**2 * np.sin(2 * np.pi * p0),
            p1 + p2 + (p1 - p3) ** 2,
            p1 - 2 * p2 + (p0 - p3) ** 2,
            -p1 - 2 * p2 + (p2 - p3) ** 2,
            p0**2 - p1**2 + p2**2 - p3**2,
        ]
    )


def _polar_blocks(d, m, turns):
    """Each block maps ``p`` to pairs ``(1 + p_j) * (cos, sin)(2 pi turns p_{j+b+1})``."""
    blocks = m // (2 * d)

    def gen(p_rng, n):
        p = p_rng.uniform(0.0, 1.0, size=(n, d))
        radius = 1.0 + p
        cols = []
        for b in range(blocks):
            angle = 2.0 * np.pi * turns * np.roll(p, -(b + 1), axis=1)
            cols.append(radius * np.cos(angle))
            cols.append(radius * np.sin(angle))
        return np.hstack(cols)

    return gen


_HELIX_PITCH = 1.0


def _helicoid(p_rng, n):
    u = p_rng.uniform(-1.0, 1.0, n)
    v = p_rng.uniform(0.0, 4.0 * np.pi, n)
    return np.column_stack([u * np.cos(v), u * np.sin(v), _HELIX_PITCH * v])


def _swiss_roll(p_rng, n):
    t = 1.5 * np.pi * (1.0 + 2.0 * p_rng.uniform(0.0, 1.0, n))
    h = 21.0 * p_rng.uniform(0.0, 1.0, n)
    return np.column_stack([t * np.cos(t), h, t * np.sin(t)])


def _cube(d, m):
    def gen(p_rng, n):
        x = np.zeros((n, m))
        x[:, :d] = p_rng.uniform(0.0, 1.0, size=(n, d))
        return x

    return gen


def _moebius(p_rng, n):
    u = p_rng.uniform(0.0, 2.0 * np.pi, n)
    v = p_rng.uniform(-1.0, 1.0, n)
    w = 1.0 + 0.5 * v * np.cos(5.0 * u)
    return np.column_stack([w * np.cos(u), w * np.sin(u), 0.5 * v * np.sin(5.0 * u)])


def _gaussian(p_rng, n):
    return p_rng.standard_normal((n, 10))


def _curve_point(t):
    t = np.asarray(t, dtype=float)
    cols = [t]
    for j in range(1, 5):
        cols.append(np.sin(np.pi * j * t) / j)
        cols.append(np.cos(np.pi * j * t) / j)
    cols.append(t * t)
    return np.stack(cols, axis=-1)


def _curve(p_rng, n):
    return _curve_point(p_rng.uniform(0.0, 1.0, n))


# --- membership residuals ---------------------------------------------------


def _box_excess(x, lo, hi):
    return np.linalg.norm(np.maximum(0.0, lo - x) + np.maximum(0.0, x - hi), axis=-1)


def _res_sphere(x):
    return np.abs(np.linalg.norm(x, axis=-1) - 1.0)


def _res_affine(x):
    off = (x - _AFFINE_B) @ _AFFINE_NULL
    p = np.linalg.lstsq(_AFFINE_A, (x - _AFFINE_B).T, rcond=None)[0].T
    return np.linalg.norm(off, axis=-1) + _box_excess(p, -1.0, 1.0)


def _res_helicoid(x):
    # On the surface the direction of (x, y) is +-(cos z, sin z).
    v = x[..., 2] / _HELIX_PITCH
    return np.abs(x[..., 0] * np.sin(v) - x[..., 1] * np.cos(v)) + _box_excess(
        np.stack([np.hypot(x[..., 0], x[..., 1]), v], axis=-1), [0.0, 0.0], [1.0, 4.0 * np.pi]
    )


def _res_swiss(x):
    t = np.hypot(x[..., 0], x[..., 2])
    off = np.hypot(x[..., 0] - t * np.cos(t), x[..., 2] - t * np.sin(t))
    box = _box_excess(np.stack([t, x[..., 1]], axis=-1), [1.5 * np.pi, 0.0], [4.5 * np.pi, 21.0])
    return off + box


def _res_cube(d, m):
    def res(x):
        inside = _box_excess(x[..., :d], 0.0, 1.0)
        return inside + np.linalg.norm(x[..., d:m], axis=-1) if m > d else inside

    return res


def _res_moebius(x):
    u = np.arctan2(x[..., 1], x[..., 0])
    rho = np.hypot(x[..., 0], x[..., 1]) - 1.0
    z = x[..., 2]
    # (rho, z) = 0.5 v (cos 5u, sin 5u) with |v| <= 1.
    off = np.abs(rho * np.sin(5.0 * u) - z * np.cos(5.0 * u))
    return off + np.maximum(0.0, np.hypot(rho, z) - 0.5)


def _res_curve(x):
    t = np.clip(x[..., 0], 0.0, 1.0)
    return np.linalg.norm(x - _curve_point(t), axis=-1)


@dataclass(frozen=True)
class ManifoldSpec:
    id: str
    d: int
    m: int
    description: str
    sampler: Callable
    residual: Optional[Callable] = None


MANIFOLDS = {
    s.id: s
    for s in [
        ManifoldSpec("M1", 9, 10, "Sphere S^9", _sphere, _res_sphere),
        ManifoldSpec("M2", 3, 5, "Affine subspace", _affine, _res_affine),
        ManifoldSpec("M3", 4, 6, "Nonlinear manifold", _nonlinear_4_6),
        ManifoldSpec("M4", 4, 8, "Nonlinear manifold", _polar_blocks(4, 8, 0.5)),
        ManifoldSpec("M5", 2, 3, "Helix", _helicoid, _res_helicoid),
        ManifoldSpec("M6", 6, 36, "Nonlinear manifold", _polar_blocks(6, 36, 0.5)),
        ManifoldSpec("M7", 2, 3, "Swiss roll", _swiss_roll, _res_swiss),
        ManifoldSpec("M8", 12, 72, "Highly curved manifold", _polar_blocks(12, 72, 2.0)),
        ManifoldSpec("M9", 20, 20, "Full-dimensional cube", _cube(20, 20), _res_cube(20, 20)),
        ManifoldSpec("M10", 9, 10, "9-dimensional cube", _cube(9, 10), _res_cube(9, 10)),
        ManifoldSpec("M11", 2, 3, "Ten-times twisted Mobius band", _moebius, _res_moebius),
        ManifoldSpec("M12", 10, 10, "Multivariate Gaussian", _gaussian),
        ManifoldSpec("M13", 1, 10, "Curve", _curve, _res_curve),
    ]
}


def get_spec(spec) -> ManifoldSpec:
    if isinstance(spec, ManifoldSpec):
        return spec
    key = str(spec).upper()
    if key not in MANIFOLDS:
        raise ConfigurationError(f"unknown manifold {spec!r}; choose from {', '.join(MANIFOLDS)}")
    return MANIFOLDS[key]


def generate(spec, n: int, seed: int = 0, rng=None) -> PointCloud:
    """``n`` points on manifold ``spec``; the stream is ``(seed, manifold number)`` unless ``rng`` is given."""
    spec = get_spec(spec)
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if rng is None:
        rng = make_rng(seed, int(spec.id[1:]))
    x = spec.sampler(rng, int(n))
    assert x.shape == (n, spec.m), (spec.id, x.shape)
    return PointCloud(x)


def membership_residual(spec, point):
    """Distance-like residual of ``point`` from the manifold, ``0`` on it.

    Returns ``None`` for manifolds without an implicit description
    (M3, M4, M6, M8, M12).
    """
    spec = get_spec(spec)
    if spec.residual is None:
        return None
    x = np.asarray(point, dtype=float)
    if x.shape[-1] != spec.m:
        raise ConfigurationError(f"{spec.id} lives in R^{spec.m}, got a point with {x.shape[-1]} coordinates")
    r = spec.residual(x)
    return float(r) if np.ndim(r) == 0 else r
