"""Dimension estimate at a single center from its angle-variance statistic.

Three rules turn the statistic ``u`` into an integer dimension:

* ``basic``: nearest ``beta(d)``.
* ``discriminant``: cut the range of ``u`` at variance-weighted midpoints
  between consecutive ``beta`` values.
* ``kernel``: maximise a Monte Carlo density of ``k * (u - beta(d))``.

Ties always go to the smaller dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .angle_kernel import as_cloud, knn, u_statistic
from .calibration import CalibrationCache, kde_logpdf
from .errors import CalibrationMismatchError, ConfigurationError
from .moments import MomentTable, moment_table, sigma_sq

__all__ = [
    "METHODS",
    "LocalConfig",
    "LocalEstimate",
    "default_k",
    "resolve_config",
    "estimate_basic",
    "discriminant_thresholds",
    "estimate_discriminant",
    "estimate_kernel",
    "estimate_from_u",
    "estimate_local",
]

METHODS = ("basic", "discriminant", "kernel")
_ALIASES = {"disc": "discriminant", "ker": "kernel"}


def _normalise_method(method):
    method = _ALIASES.get(method, method)
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return method


@dataclass(frozen=True)
class LocalConfig:
    """``k`` and ``d_max`` left as ``None`` are filled from the data."""

    k: Optional[int] = None
    d_max: Optional[int] = None
    method: str = "basic"

    def __post_init__(self):
        object.__setattr__(self, "method", _normalise_method(self.method))
        if self.k is not None and self.k < 2:
            raise ConfigurationError(f"k must be >= 2, got {self.k}")
        if self.d_max is not None and self.d_max < 1:
            raise ConfigurationError(f"d_max must be >= 1, got {self.d_max}")


@dataclass(frozen=True)
class LocalEstimate:
    d_hat: int
    u_value: float
    mean_angle: float
    k: int
    center_index: Optional[int] = None  # None for a center that is not a sample point
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "d_hat": self.d_hat,
            "u_value": self.u_value,
            "mean_angle": self.mean_angle,
            "k": self.k,
            "center_index": self.center_index,
        }


def default_k(n: int) -> int:
    """``round(10 * log10(n))`` with halves rounded up, never below 2."""
    if n < 2:
        raise ConfigurationError(f"need n >= 2 points, got {n}")
    return max(2, math.floor(10.0 * math.log10(n) + 0.5))


def resolve_config(cfg: LocalConfig, n: int, m: int) -> LocalConfig:
    k = cfg.k if cfg.k is not None else default_k(n)
    d_max = cfg.d_max if cfg.d_max is not None else m
    return LocalConfig(k=k, d_max=d_max, method=cfg.method)


def _argmin_first(values):
    # np.argmin already returns the first occurrence.
    return int(np.argmin(values))


def estimate_basic(u_value: float, table: MomentTable, d_max: Optional[int] = None) -> int:
    """The ``d`` in ``1..d_max`` whose ``beta(d)`` is closest to ``u_value``."""
    d_max = table.d_max if d_max is None else min(d_max, table.d_max)
    gaps = np.abs(table.beta[1 : d_max + 1] - u_value)
    return _argmin_first(gaps) + 1


def discriminant_thresholds(table: MomentTable, d_max: Optional[int] = None) -> np.ndarray:
    """Upper class edges ``eta[d]`` for ``d = 2..d_max`` (index by ``d``).

    ``eta[d] = beta(d) + sigma_d / (sigma_d + sigma_{d+1}) * (beta(d-1) - beta(d))``
    sits between ``beta(d)`` and ``beta(d-1)``. ``eta[1]`` is ``+inf``.
    """
    d_max = table.d_max if d_max is None else min(d_max, table.d_max)
    eta = np.full(d_max + 1, np.nan)
    eta[1] = np.inf
    sig = [math.sqrt(sigma_sq(d)) for d in range(0 + 1, d_max + 2)]  # sig[d-1] = sigma_d
    for d in range(2, d_max + 1):
        s_d, s_next = sig[d - 1], sig[d]
        eta[d] = table.beta[d] + s_d / (s_d + s_next) * (table.beta[d - 1] - table.beta[d])
    return eta


def estimate_discriminant(u_value: float, table: MomentTable, d_max: Optional[int] = None) -> int:
    """Class ``d`` of ``u_value`` in the partition ``[eta[d+1], eta[d])``.

    Larger statistics mean smaller dimensions, so the answer is the largest
    ``d`` whose upper edge still exceeds ``u_value``.
    """
    eta = discriminant_thresholds(table, d_max)
    below = np.flatnonzero(u_value < eta[1:])
    return int(below[-1]) + 1


def estimate_kernel(
    u_value: float,
    k: int,
    cache: CalibrationCache,
    table: MomentTable,
    d_max: Optional[int] = None,
) -> int:
    """Dimension whose simulated density of ``k * (U - beta(d))`` is highest at ``u_value``."""
    d_max = table.d_max if d_max is None else min(d_max, table.d_max)
    if cache is None:
        raise CalibrationMismatchError("the kernel rule needs a calibration cache")
    cache.check(k, d_max)
    logdens = np.array(
        [kde_logpdf(cache.samples(d), k * (u_value - table.beta[d])) for d in range(1, d_max + 1)]
    )
    return int(np.argmax(logdens)) + 1


def estimate_from_u(u_value, cfg: LocalConfig, table, cache=None) -> int:
    if cfg.method == "basic":
        return estimate_basic(u_value, table, cfg.d_max)
    if cfg.method == "discriminant":
        return estimate_discriminant(u_value, table, cfg.d_max)
    return estimate_kernel(u_value, cfg.k, cache, table, cfg.d_max)


def estimate_local(
    cloud,
    center,
    cfg: LocalConfig = LocalConfig(),
    table: Optional[MomentTable] = None,
    cache: Optional[CalibrationCache] = None,
    center_index: Optional[int] = None,
) -> LocalEstimate:
    """Run neighbour search, the U-statistic and the configured rule at ``center``."""
    cloud = as_cloud(cloud)
    cfg = resolve_config(cfg, cloud.n, cloud.m)
    if table is None or table.d_max < cfg.d_max:
        table = moment_table(cfg.d_max)
    if cfg.method == "kernel":
        if cache is None:
            raise CalibrationMismatchError("the kernel rule needs a calibration cache")
        cache.check(cfg.k, cfg.d_max)
    stat = u_statistic(knn(cloud, center, cfg.k))
    d_hat = estimate_from_u(stat.u_value, cfg, table, cache)
    return LocalEstimate(
        d_hat=d_hat,
        u_value=stat.u_value,
        mean_angle=stat.mean_angle,
        k=stat.k,
        center_index=center_index,
    )
