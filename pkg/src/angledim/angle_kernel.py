"""Nearest neighbours of a center and the angle-variance U-statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientSampleError, ValidationError

__all__ = [
    "PointCloud",
    "NeighborSet",
    "AngleStat",
    "as_cloud",
    "knn",
    "angle_h",
    "u_statistic",
    "pair_statistics",
]

HALF_PI = 0.5 * math.pi
# Relative tolerance under which a point counts as coincident with the center.
COINCIDENT_RTOL = 1e-12


@dataclass(frozen=True)
class PointCloud:
    """``n`` points in ``R^m`` stored row-wise in a read-only float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"expected an (n, m) array with n, m >= 1, got shape {pts.shape}")
        bad = ~np.isfinite(pts).all(axis=1)
        if bad.any():
            raise ValidationError("non-finite coordinate", line=int(np.argmax(bad)) + 1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


def as_cloud(data) -> PointCloud:
    return data if isinstance(data, PointCloud) else PointCloud(data)


@dataclass(frozen=True)
class NeighborSet:
    center: np.ndarray
    indices: np.ndarray
    distances: np.ndarray
    vectors: np.ndarray  # neighbour minus center, one row per neighbour

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class AngleStat:
    u_value: float
    mean_angle: float
    k: int


def _center_vector(cloud, center):
    c = np.asarray(center, dtype=float).reshape(-1)
    if c.shape[0] != cloud.m:
        raise DomainError(f"center has {c.shape[0]} coordinates, cloud has m={cloud.m}")
    if not np.isfinite(c).all():
        raise DomainError("center has non-finite coordinates")
    return c


def knn(cloud, center, k: int) -> NeighborSet:
    """The ``k`` nearest points of ``cloud`` to ``center`` by Euclidean distance.

    Points coincident with the center (distance below ``1e-12`` relative to
    the largest distance) are skipped. Ties are resolved by lower index.
    """
    cloud = as_cloud(cloud)
    c = _center_vector(cloud, center)
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    diff = cloud.points - c
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    scale = float(dist.max()) if dist.size else 0.0
    usable = np.flatnonzero(dist > COINCIDENT_RTOL * scale) if scale > 0 else np.empty(0, dtype=int)
    if usable.size < k:
        raise InsufficientSampleError(
            f"need {k} points distinct from the center, only {usable.size} available"
        )
    d_use = dist[usable]
    if k < usable.size:
        # Partition first, then stable-sort the survivors (plus any tie at
        # the k-th distance) so that equal distances keep index order.
        kth = np.partition(d_use, k - 1)[k - 1]
        cand = np.flatnonzero(d_use <= kth)
    else:
        cand = np.arange(usable.size)
    order = cand[np.argsort(d_use[cand], kind="stable")][:k]
    idx = usable[order]
    return NeighborSet(center=c, indices=idx, distances=dist[idx], vectors=diff[idx])


def angle_h(u, v) -> float:
    """``(arccos<u, v> - pi/2)**2`` for unit vectors ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for name, w in (("u", u), ("v", v)):
        if abs(float(np.linalg.norm(w)) - 1.0) > 1e-9:
            raise DomainError(f"{name} is not a unit vector")
    c = min(1.0, max(-1.0, float(u @ v)))
    return (math.acos(c) - HALF_PI) ** 2


def pair_statistics(units):
    """Mean of ``h`` and mean angle over all unordered pairs of unit rows.

    ``units`` may carry leading batch axes: shape ``(..., k, dim)``.
    Returns arrays of shape ``(...)``.
    """
    units = np.asarray(units, dtype=float)
    k = units.shape[-2]
    gram = np.clip(units @ np.swapaxes(units, -1, -2), -1.0, 1.0)
    iu = np.triu_indices(k, 1)
    angles = np.arccos(gram[..., iu[0], iu[1]])
    dev = angles - HALF_PI
    return np.mean(dev * dev, axis=-1), np.mean(angles, axis=-1)


def u_statistic(neighbors: NeighborSet) -> AngleStat:
    """Angle-variance statistic over the neighbour directions seen from the center."""
    k = neighbors.k
    if k < 2:
        raise InsufficientSampleError(f"the statistic needs k >= 2 neighbours, got {k}")
    vec = np.asarray(neighbors.vectors, dtype=float)
    units = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    u, mean_angle = pair_statistics(units)
    return AngleStat(u_value=float(u), mean_angle=float(mean_angle), k=k)
