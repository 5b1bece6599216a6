"""Independent reference computations used only by the test-suite."""

import itertools
import math

import numpy as np


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=60):
    """Classic recursive adaptive Simpson with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def angle_moment(d, g):
    """E[g(Theta_d)] for d >= 2 from the sin**(d-2) density."""
    p = d - 2

    def w(phi):
        return math.sin(phi) ** p

    norm = adaptive_simpson(w, 0.0, math.pi)
    return adaptive_simpson(lambda phi: g(phi) * w(phi), 0.0, math.pi) / norm


def angle_variance(d):
    return angle_moment(d, lambda phi: (phi - math.pi / 2) ** 2)


def centered_square_variance(d):
    m2 = angle_variance(d)
    m4 = angle_moment(d, lambda phi: (phi - math.pi / 2) ** 4)
    return m4 - m2 * m2


def naive_u_statistic(center, neighbors):
    """Double loop over unordered pairs, no vectorisation."""
    center = np.asarray(center, dtype=float)
    units = []
    for x in np.asarray(neighbors, dtype=float):
        v = x - center
        units.append(v / math.sqrt(float(v @ v)))
    total_h = 0.0
    total_angle = 0.0
    count = 0
    for i, j in itertools.combinations(range(len(units)), 2):
        c = max(-1.0, min(1.0, float(units[i] @ units[j])))
        angle = math.acos(c)
        total_h += (angle - math.pi / 2) ** 2
        total_angle += angle
        count += 1
    return total_h / count, total_angle / count


def brute_force_knn(points, center, k):
    """Sort every distance; drop zero distances; stable on index."""
    points = np.asarray(points, dtype=float)
    dists = [math.dist(p, center) for p in points]
    order = sorted((dd, i) for i, dd in enumerate(dists) if dd > 0)
    return [i for _, i in order[:k]], [dd for dd, _ in order[:k]]
