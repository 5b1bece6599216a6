"""Global dimension as the median of local estimates at well-centred points."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .angle_kernel import as_cloud
from .calibration import CalibrationCache, make_rng
from .errors import CalibrationMismatchError, ConfigurationError
from .local_estimator import LocalConfig, LocalEstimate, estimate_local, resolve_config
from .moments import MomentTable, moment_table

__all__ = [
    "GlobalConfig",
    "GlobalEstimate",
    "default_c",
    "rank_weight",
    "centrality_scores",
    "partition",
    "pick_centers",
    "mean_angle_discard",
    "median_dimension",
    "estimate_global",
]

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class GlobalConfig:
    """Settings for the median-of-centers estimator.

    ``weight`` selects the per-coordinate rank weight: ``"central"`` peaks
    at the middle rank (the default), ``"printed"`` is
    ``|1/2 - (x - 1)/n|`` which peaks at the extremes.
    """

    c: Optional[int] = None
    discard_fraction: float = 0.0
    local: LocalConfig = field(default_factory=LocalConfig)
    weight: str = "central"

    def __post_init__(self):
        if self.c is not None and self.c < 1:
            raise ConfigurationError(f"c must be >= 1, got {self.c}")
        if not 0.0 <= self.discard_fraction < 1.0:
            raise ConfigurationError(f"discard fraction must be in [0, 1), got {self.discard_fraction}")
        if self.weight not in ("central", "printed"):
            raise ConfigurationError(f"unknown weight {self.weight!r}")


@dataclass
class GlobalEstimate:
    d_hat: int
    per_center: list
    discarded: list  # (center_index, |mean_angle - pi/2|)
    seed: Optional[int] = None
    k: Optional[int] = None
    c: Optional[int] = None

    def to_dict(self):
        return {
            "d_hat": self.d_hat,
            "k": self.k,
            "c": self.c,
            "seed": self.seed,
            "per_center": [e.to_dict() for e in self.per_center],
            "discarded": [{"center_index": i, "deviation": dev} for i, dev in self.discarded],
        }


def default_c(n: int) -> int:
    """``round(2 ln n)``, at least 1."""
    if n < 2:
        raise ConfigurationError(f"need n >= 2 points, got {n}")
    return max(1, math.floor(2.0 * math.log(n) + 0.5))


def rank_weight(rank, n, weight="central"):
    """Score of 1-based ``rank`` among ``n``; ``central`` is ``1/2 - printed``."""
    printed = np.abs(0.5 - 2.0 * (np.asarray(rank, dtype=float) - 1.0) / (2.0 * n))
    return 0.5 - printed if weight == "central" else printed


def centrality_scores(points, weight="central") -> np.ndarray:
    """Sum over coordinates of the rank weight of each point.

    Ranks run 1..n per coordinate with ties broken by row order.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n == 0:
        raise ConfigurationError("cannot score an empty subsample")
    order = np.argsort(pts, axis=0, kind="stable")
    ranks = np.empty_like(order)
    cols = np.arange(pts.shape[1])
    ranks[order, cols] = np.arange(1, n + 1)[:, None]
    return rank_weight(ranks, n, weight).sum(axis=1)


def partition(n: int, c: int, rng=None):
    """Split ``range(n)`` into ``c`` disjoint, near-equal, index-sorted chunks.

    With an ``rng`` the indices are shuffled first; chunk sizes differ by at
    most one.
    """
    if c < 1 or n < c:
        raise ConfigurationError(f"cannot split {n} points into {c} subsamples")
    idx = rng.permutation(n) if rng is not None else np.arange(n)
    return [np.sort(chunk) for chunk in np.array_split(idx, c)]


def pick_centers(cloud, c: int, rng=None, weight="central") -> list:
    """Indices of the most central point of each of ``c`` subsamples."""
    cloud = as_cloud(cloud)
    centers = []
    for chunk in partition(cloud.n, c, rng):
        scores = centrality_scores(cloud.points[chunk], weight)
        centers.append(int(chunk[int(np.argmax(scores))]))
    return centers


def mean_angle_discard(estimates, fraction: float):
    """Drop the ``ceil(fraction * count)`` centers whose mean angle is farthest from pi/2.

    Returns ``(survivors, discarded)``; survivors keep their input order and
    ``discarded`` lists ``(center_index, deviation)``. Among equal deviations
    the higher center index is dropped first.
    """
    if not 0.0 <= fraction < 1.0:
        raise ConfigurationError(f"discard fraction must be in [0, 1), got {fraction}")
    estimates = list(estimates)
    count = len(estimates)
    # Guard against products like 0.1 * 30 = 3.0000000000000004.
    n_drop = math.ceil(fraction * count - 1e-9) if fraction > 0 else 0
    if n_drop == 0:
        return estimates, []
    if n_drop >= count:
        raise ConfigurationError(f"discarding {n_drop} of {count} centers leaves none")
    dev = [abs(e.mean_angle - HALF_PI) for e in estimates]
    key = [e.center_index if e.center_index is not None else pos for pos, e in enumerate(estimates)]
    ranked = sorted(range(count), key=lambda p: (-dev[p], -key[p]))
    dropped = set(ranked[:n_drop])
    survivors = [e for p, e in enumerate(estimates) if p not in dropped]
    discarded = [(key[p], dev[p]) for p in sorted(dropped, key=lambda p: key[p])]
    return survivors, discarded


def median_dimension(values) -> int:
    """Median of integer estimates; an even count averages the middle pair and rounds down."""
    v = sorted(int(x) for x in values)
    if not v:
        raise ConfigurationError("no estimates to aggregate")
    mid = len(v) // 2
    if len(v) % 2:
        return v[mid]
    return (v[mid - 1] + v[mid]) // 2


def estimate_global(
    cloud,
    cfg: GlobalConfig = GlobalConfig(),
    table: Optional[MomentTable] = None,
    cache: Optional[CalibrationCache] = None,
    seed: int = 0,
    threads: int = 1,
) -> GlobalEstimate:
    """Pick centers, estimate locally at each against the full cloud, take the median."""
    cloud = as_cloud(cloud)
    local = resolve_config(cfg.local, cloud.n, cloud.m)
    c = cfg.c if cfg.c is not None else default_c(cloud.n)
    if table is None or table.d_max < local.d_max:
        table = moment_table(local.d_max)
    if local.method == "kernel":
        if cache is None:
            raise CalibrationMismatchError("the kernel rule needs a calibration cache")
        cache.check(local.k, local.d_max)

    centers = pick_centers(cloud, c, make_rng(seed, 0), cfg.weight)

    def run(i):
        return estimate_local(cloud, cloud.points[i], local, table, cache, center_index=i)

    if threads and threads > 1 and len(centers) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_center = list(pool.map(run, centers))
    else:
        per_center = [run(i) for i in centers]

    survivors, discarded = mean_angle_discard(per_center, cfg.discard_fraction)
    return GlobalEstimate(
        d_hat=median_dimension(e.d_hat for e in survivors),
        per_center=per_center,
        discarded=discarded,
        seed=seed,
        k=local.k,
        c=c,
    )
