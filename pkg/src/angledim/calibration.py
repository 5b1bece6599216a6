"""Monte Carlo calibration on exactly uniform sphere data.

``E_n`` is the angle-variance statistic of ``k`` i.i.d. uniform points on
``S^{d-1}``; it is what the statistic of a flat ``d``-dimensional
neighbourhood looks like. Samples of ``k * (E_n - beta(d))`` feed the kernel
estimator and the QQ diagnostics.

Randomness: every task owns a ``numpy`` PCG64 stream derived from
``SeedSequence(seed, spawn_key=task)``, so a (seed, task) pair reproduces
the same numbers regardless of scheduling.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import logsumexp, ndtri

from .errors import CalibrationMismatchError, DomainError
from .moments import beta, sigma_sq

__all__ = [
    "CACHE_FORMAT_VERSION",
    "DEFAULT_SAMPLES",
    "CacheEntry",
    "CalibrationCache",
    "make_rng",
    "derive_seed",
    "sample_uniform_sphere",
    "sample_en",
    "sample_en_batch",
    "build_cache",
    "bandwidth",
    "kde_eval",
    "kde_logpdf",
    "qq_data",
]

CACHE_FORMAT_VERSION = 1
DEFAULT_SAMPLES = 5000
SEED_BITS = 64
# Upper bound on gram-matrix entries held in memory per batch.
_BATCH_ENTRIES = 4_000_000


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed, *task) -> np.random.Generator:
    """Generator for the stream ``task`` (a tuple of non-negative ints) under ``seed``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(t) for t in task))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *task) -> int:
    """A single 64-bit seed standing for stream ``task`` under ``seed``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(t) for t in task))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_uniform_sphere(d: int, count: int, rng) -> np.ndarray:
    """``count`` uniform points on ``S^{d-1}`` as rows, via normalised Gaussians."""
    if d < 1:
        raise DomainError(f"sphere dimension d must be >= 1, got {d}")
    g = rng.standard_normal((int(count), int(d)))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # A zero Gaussian vector has probability 0; redraw defensively.
    while np.any(norms == 0):
        bad = np.flatnonzero(norms[:, 0] == 0)
        g[bad] = rng.standard_normal((bad.size, int(d)))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


@lru_cache(maxsize=16)
def _upper_pairs(k):
    i, j = np.triu_indices(k, 1)
    return i * k + j


def _en_from_units(z):
    """E_n for a batch ``(b, k, d)`` of unit vectors.

    Uses ``(arccos c - pi/2)**2 == arcsin(c)**2`` on the strict upper
    triangle of each gram matrix.
    """
    b, k, _ = z.shape
    pairs = _upper_pairs(k)
    gram = (z @ np.swapaxes(z, -1, -2)).reshape(b, k * k)
    c = np.take(gram, pairs, axis=1)
    np.clip(c, -1.0, 1.0, out=c)
    np.arcsin(c, out=c)
    return np.einsum("ij,ij->i", c, c) / pairs.size


def sample_en_batch(d: int, k: int, size: int, rng) -> np.ndarray:
    """``size`` independent draws of ``E_n`` with ``k`` points on ``S^{d-1}``."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    out = np.empty(int(size))
    per = max(1, _BATCH_ENTRIES // (k * max(k, d)))
    for start in range(0, out.size, per):
        b = min(per, out.size - start)
        z = sample_uniform_sphere(d, b * k, rng).reshape(b, k, d)
        out[start : start + b] = _en_from_units(z)
    return out


def sample_en(d: int, k: int, rng) -> float:
    return float(sample_en_batch(d, k, 1, rng)[0])


def bandwidth(m: int) -> float:
    """Rule-of-thumb Gaussian bandwidth ``(4 / (3 M)) ** (1/5)``."""
    if m < 1:
        raise DomainError("bandwidth needs at least one sample")
    return (4.0 / (3.0 * m)) ** 0.2


def kde_logpdf(samples, y, h=None):
    """Log of the Gaussian kernel density estimate at ``y`` (scalar or array)."""
    s = np.asarray(samples, dtype=float).reshape(-1)
    if s.size == 0:
        raise DomainError("kernel density needs at least one sample")
    if h is None:
        h = bandwidth(s.size)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    z = (y_arr[:, None] - s[None, :]) / h
    out = logsumexp(-0.5 * z * z, axis=1) - math.log(s.size * h * math.sqrt(2.0 * math.pi))
    return out if np.ndim(y) else float(out[0])


def kde_eval(samples, y, h=None):
    """Gaussian kernel density estimate ``(1/(M h)) sum phi((y - Y_i)/h)``."""
    lp = kde_logpdf(samples, y, h)
    return np.exp(lp) if np.ndim(lp) else math.exp(lp)


@dataclass
class CacheEntry:
    d: int
    samples: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return int(self.samples.size)


@dataclass
class CalibrationCache:
    """Raw samples of ``k * (E_n - beta(d))`` for each dimension ``d``."""

    k: int
    entries: dict = field(default_factory=dict)
    format_version: int = CACHE_FORMAT_VERSION

    @property
    def d_max(self) -> int:
        return max(self.entries) if self.entries else 0

    def samples(self, d: int) -> np.ndarray:
        try:
            return self.entries[d].samples
        except KeyError:
            raise CalibrationMismatchError(f"calibration cache has no entry for d={d}") from None

    def check(self, k: int, d_max: int):
        """Raise unless this cache serves neighbourhood size ``k`` for ``1..d_max``."""
        if int(k) != self.k:
            raise CalibrationMismatchError(f"cache was generated with k={self.k}, estimator uses k={k}")
        missing = [d for d in range(1, int(d_max) + 1) if d not in self.entries]
        if missing:
            raise CalibrationMismatchError(f"cache lacks dimensions {missing}")

    def to_json(self) -> str:
        doc = {
            "format_version": self.format_version,
            "k": self.k,
            "entries": [
                {"d": d, "M": e.m, "seed": e.seed, "samples": e.samples.tolist()}
                for d, e in sorted(self.entries.items())
            ],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CalibrationCache":
        doc = json.loads(text)
        version = doc.get("format_version")
        if version != CACHE_FORMAT_VERSION:
            raise CalibrationMismatchError(f"unsupported cache format_version {version!r}")
        cache = cls(k=int(doc["k"]), format_version=version)
        for item in doc["entries"]:
            samples = np.asarray(item["samples"], dtype=float)
            if samples.size != int(item["M"]):
                raise CalibrationMismatchError(
                    f"entry d={item['d']} declares M={item['M']} but holds {samples.size} samples"
                )
            cache.entries[int(item["d"])] = CacheEntry(int(item["d"]), samples, int(item["seed"]))
        return cache

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "CalibrationCache":
        return cls.from_json(Path(path).read_text())


def _entry(d, k, m, seed):
    entry_seed = derive_seed(seed, d)
    rng = np.random.Generator(np.random.PCG64(entry_seed))
    en = sample_en_batch(d, k, m, rng)
    return CacheEntry(d=d, samples=k * (en - beta(d)), seed=entry_seed)


def build_cache(d_max: int, k: int, m: int = DEFAULT_SAMPLES, seed: int = 0, threads: int = 1) -> CalibrationCache:
    """Simulate ``m`` values of ``k * (E_n - beta(d))`` for every ``d`` in ``1..d_max``.

    Each dimension uses its own derived stream, so the result does not
    depend on ``threads``.
    """
    if m < 100:
        raise DomainError(f"calibration needs M >= 100 samples, got {m}")
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if d_max < 1:
        raise DomainError(f"d_max must be >= 1, got {d_max}")
    seed = _check_seed(seed)
    dims = range(1, int(d_max) + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(lambda d: _entry(d, k, m, seed), dims))
    else:
        entries = [_entry(d, k, m, seed) for d in dims]
    return CalibrationCache(k=int(k), entries={e.d: e for e in entries})


def qq_data(d: int, k: int, m: int, seed: int = 0):
    """Quantile pairs for a normal QQ plot of ``k * (E_n - beta(d))``.

    Samples are standardised with the exact moments: mean 0 and standard
    deviation ``k * sigma_d / sqrt(C(k, 2))``. Returns
    ``(normal_quantiles, sorted_standardised_samples)``.
    """
    if d < 2:
        raise DomainError("d = 1 has a constant statistic and no QQ plot")
    if m < 1:
        raise DomainError("need at least one sample")
    rng = make_rng(seed, d, k)
    y = k * (sample_en_batch(d, k, m, rng) - beta(d))
    sd = k * math.sqrt(sigma_sq(d) / math.comb(k, 2))
    z = np.sort(y / sd)
    probs = (np.arange(1, m + 1) - 0.5) / m
    return ndtri(probs), z
