"""Closed-form moments of the angle between two uniform points on a sphere.

For two independent uniform points on the unit sphere ``S^{d-1}`` the angle
``Theta_d`` between them has mean ``pi/2`` in every dimension. Its variance
``beta(d)`` and the variance ``sigma_sq(d)`` of ``(Theta_d - pi/2)**2`` are
finite sums that shrink roughly like ``1/d`` and ``1/d**2``. These numbers
are all the basic dimension estimator needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "MomentTable",
    "beta",
    "sigma_sq",
    "moment_table",
    "theta_cdf",
    "theta_mgf",
]

HALF_PI = 0.5 * math.pi


def _check_dim(d, minimum=1):
    if isinstance(d, bool) or int(d) != d:
        raise DomainError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < minimum:
        raise DomainError(f"dimension must be >= {minimum}, got {d}")
    return d


def _parity_split(d):
    """Return ``(odd, k)`` with ``d - 2 = 2k + 1`` (odd) or ``d - 2 = 2k``."""
    r = d - 2
    if r % 2:
        return True, (r - 1) // 2
    return False, r // 2


def _partial_sums(d):
    """Return ``(s2, s4)``: sums of ``1/a**2`` and ``1/a**4`` over the terms of ``d``.

    Odd case runs over ``a = 1, 3, ..., 2k+1``; even case over ``a = 2, 4, ..., 2k``.
    Terms are added smallest first.
    """
    odd, k = _parity_split(d)
    if odd:
        denoms = [2 * j + 1 for j in range(k, -1, -1)]
    else:
        denoms = [2 * j for j in range(k, 0, -1)]
    s2 = 0.0
    s4 = 0.0
    for a in denoms:
        a2 = float(a) * a
        s2 += 1.0 / a2
        s4 += 1.0 / (a2 * a2)
    return s2, s4


def beta(d: int) -> float:
    """Variance of the angle between two uniform points on ``S^{d-1}``.

    ``beta(1) = pi**2/4`` since the two points of ``S^0`` are either equal
    or antipodal. Raises :class:`DomainError` for ``d < 1``.
    """
    d = _check_dim(d)
    odd, _ = _parity_split(d)
    s2, _ = _partial_sums(d)
    if odd:
        return math.pi**2 / 4.0 - 2.0 * s2
    return math.pi**2 / 12.0 - 2.0 * s2


def sigma_sq(d: int) -> float:
    """Variance of ``(Theta_d - pi/2)**2``.

    Equals ``mu_4 - mu_2**2`` of the centred angle. For ``d = 1`` the
    squared deviation is the constant ``pi**2/4`` and this returns ``0``.
    """
    d = _check_dim(d)
    if d == 1:
        return 0.0
    odd, _ = _parity_split(d)
    s2, s4 = _partial_sums(d)
    if odd:
        b = math.pi**2 / 4.0 - 2.0 * s2
        return -(math.pi**4) / 8.0 + 12.0 * s4 + 2.0 * b * b
    b = math.pi**2 / 12.0 - 2.0 * s2
    return -(math.pi**4) / 120.0 + 12.0 * s4 + 2.0 * b * b


def theta_cdf(d: int, alpha: float) -> float:
    """``P(Theta_d <= alpha)`` by adaptive quadrature of ``sin**(d-2)``.

    Args:
        d: sphere dimension parameter, at least 2. ``d = 1`` has a
            two-point law with no density and is rejected.
        alpha: angle in ``[0, pi]``.
    """
    d = _check_dim(d, minimum=2)
    alpha = float(alpha)
    if not 0.0 <= alpha <= math.pi:
        raise DomainError(f"alpha must lie in [0, pi], got {alpha!r}")
    if d == 2:
        return alpha / math.pi
    p = d - 2

    def density(phi):
        return math.sin(phi) ** p

    # Symmetry about pi/2 keeps both integrals on well-conditioned halves.
    half, _ = integrate.quad(density, 0.0, HALF_PI, epsabs=1e-14, epsrel=1e-13, limit=200)
    if alpha <= HALF_PI:
        part, _ = integrate.quad(density, 0.0, alpha, epsabs=1e-14, epsrel=1e-13, limit=200)
        return part / (2.0 * half)
    rest, _ = integrate.quad(density, 0.0, math.pi - alpha, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 - rest / (2.0 * half)


def theta_mgf(d: int, s: float) -> float:
    """Moment generating function ``E[exp(s * Theta_d)]`` for ``d >= 2``."""
    d = _check_dim(d, minimum=2)
    s = float(s)
    odd, k = _parity_split(d)
    s2 = s * s
    if odd:
        value = (math.exp(s * math.pi) + 1.0) / (2.0 * (s2 + 1.0))
        factors = ((2 * j + 1) ** 2 for j in range(1, k + 1))
    else:
        x = s * math.pi
        value = 1.0 if x == 0.0 else math.expm1(x) / x
        factors = ((2 * j) ** 2 for j in range(1, k + 1))
    for a2 in factors:
        value *= a2 / (a2 + s2)
    return value


@dataclass(frozen=True)
class MomentTable:
    """``beta`` and ``sigma_sq`` for ``d = 1..d_max``.

    Arrays are indexed directly by dimension; slot 0 holds NaN.
    """

    d_max: int
    beta: np.ndarray
    sigma_sq: np.ndarray

    def dims(self) -> np.ndarray:
        return np.arange(1, self.d_max + 1)

    def rows(self):
        for d in range(1, self.d_max + 1):
            yield d, float(self.beta[d]), float(self.sigma_sq[d])


def moment_table(d_max: int) -> MomentTable:
    d_max = _check_dim(d_max)
    b = np.full(d_max + 1, np.nan)
    s = np.full(d_max + 1, np.nan)
    for d in range(1, d_max + 1):
        b[d] = beta(d)
        s[d] = sigma_sq(d)
    b.setflags(write=False)
    s.setflags(write=False)
    return MomentTable(d_max=d_max, beta=b, sigma_sq=s)
