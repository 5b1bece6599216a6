"""Levina-Bickel maximum-likelihood dimension estimator (comparison baseline)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angle_kernel import COINCIDENT_RTOL, as_cloud
from .errors import ConfigurationError, DegenerateDataError, InsufficientSampleError

__all__ = ["LBConfig", "LBResult", "knn_distances", "lb_from_distances", "lb_local", "lb_global"]

_CHUNK_ROWS = 512


@dataclass(frozen=True)
class LBConfig:
    k1: int = 10
    k2: int = 20

    def __post_init__(self):
        if not 3 <= self.k1 <= self.k2:
            raise ConfigurationError(f"need 3 <= k1 <= k2, got k1={self.k1}, k2={self.k2}")


@dataclass(frozen=True)
class LBResult:
    dimension: float
    d_hat: int
    per_k: dict  # k -> sample average of the local estimates

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "d_hat": self.d_hat,
            "per_k": {str(k): v for k, v in self.per_k.items()},
        }


def _check_nonzero(dist, rows):
    scale = np.maximum(dist[:, -1:], np.finfo(float).tiny)
    zero = dist[:, :1] <= COINCIDENT_RTOL * scale
    if zero.any():
        r = int(rows[int(np.argmax(zero[:, 0]))])
        raise DegenerateDataError(f"point {r} has a zero nearest-neighbour distance (duplicate point)")


def knn_distances(points, k: int) -> np.ndarray:
    """Sorted distances from every point to its ``k`` nearest other points.

    Brute force in row chunks; each point's own row is excluded by index.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n <= k:
        raise InsufficientSampleError(f"need more than k={k} points, got {n}")
    sq = np.einsum("ij,ij->i", pts, pts)
    out = np.empty((n, k))
    for start in range(0, n, _CHUNK_ROWS):
        rows = np.arange(start, min(n, start + _CHUNK_ROWS))
        d2 = sq[rows, None] + sq[None, :] - 2.0 * pts[rows] @ pts.T
        # The expansion above loses precision for near points; recompute exactly below.
        d2[np.arange(rows.size), rows] = np.inf
        part = np.argpartition(d2, k, axis=1)[:, : k + 1]
        diff = pts[rows, None, :] - pts[part]
        exact = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        exact[part == rows[:, None]] = np.inf
        out[rows] = np.sort(exact, axis=1)[:, :k]
    _check_nonzero(out, np.arange(n))
    return out


def lb_from_distances(dist, k: int) -> np.ndarray:
    """Local estimates from sorted neighbour distances ``L_1 <= ... <= L_k``.

    ``1 / ((1/(k-2)) * sum_{j<k} log(L_k / L_j))`` for each row.
    """
    if k < 3:
        raise ConfigurationError(f"Levina-Bickel needs k >= 3, got {k}")
    dist = np.asarray(dist, dtype=float)
    if dist.shape[-1] < k:
        raise InsufficientSampleError(f"need {k} neighbour distances, got {dist.shape[-1]}")
    logs = np.log(dist[..., :k])
    total = (k - 1) * logs[..., k - 1] - logs[..., : k - 1].sum(axis=-1)
    if np.any(total <= 0):
        raise DegenerateDataError("all neighbour distances are equal; estimate undefined")
    return (k - 2) / total


def lb_local(cloud, i: int, k: int) -> float:
    """Local estimate at sample point ``i`` from its ``k`` nearest other points."""
    cloud = as_cloud(cloud)
    if k < 3:
        raise ConfigurationError(f"Levina-Bickel needs k >= 3, got {k}")
    if not 0 <= i < cloud.n:
        raise ConfigurationError(f"point index {i} out of range")
    diff = cloud.points - cloud.points[i]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dist = np.delete(dist, i)
    if dist.size < k:
        raise InsufficientSampleError(f"need {k} other points, got {dist.size}")
    nearest = np.sort(dist)[:k]
    _check_nonzero(nearest[None, :], [i])
    return float(lb_from_distances(nearest, k))


def _round_half_down(x):
    lo = math.floor(x)
    return lo if x - lo <= 0.5 else lo + 1


def lb_global(cloud, cfg: LBConfig = LBConfig()) -> LBResult:
    """Average over ``k = k1..k2`` of the sample mean of the local estimates."""
    cloud = as_cloud(cloud)
    if cloud.n <= cfg.k2:
        raise InsufficientSampleError(f"need n > k2={cfg.k2}, got n={cloud.n}")
    dist = knn_distances(cloud.points, cfg.k2)
    per_k = {k: float(np.mean(lb_from_distances(dist, k))) for k in range(cfg.k1, cfg.k2 + 1)}
    dim = float(np.mean(list(per_k.values())))
    return LBResult(dimension=dim, d_hat=max(1, _round_half_down(dim)), per_k=per_k)
