"""Seeded test profiles and independent oracles shared by the unit and acceptance tests."""
from __future__ import annotations

import math

import numpy as np

from choquard.energy import y_norm_sq
from choquard.model import PotentialSpec, ProblemSpec, pure_power


def random_profile(grid, rng, max_knots: int = 8):
    """Nonnegative piecewise-linear (in log r) bump with random knots, support and heights."""
    lr = np.log(grid.nodes)
    k = int(rng.integers(2, max_knots + 1))
    lo, hi = np.sort(rng.uniform(lr[0], lr[-1], 2))
    knots = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, k)), [hi]])
    heights = np.concatenate([[0.0], rng.uniform(0.0, 1.0, k), [0.0]])
    values = np.interp(lr, knots, heights, left=0.0, right=0.0)
    if not np.any(values > 0):
        values[int(np.argmin(np.abs(lr - 0.5 * (lo + hi))))] = 1.0
    return grid.function(values)


def random_smooth_profile(grid, rng):
    """Positive smooth profile: a random sum of Gaussians in r with widths in [0.3, 3]."""
    r = grid.nodes
    n = int(rng.integers(1, 4))
    values = np.zeros_like(r)
    for _ in range(n):
        c, w, a = rng.uniform(0.0, 2.0), rng.uniform(0.3, 3.0), rng.uniform(0.2, 1.0)
        values += a * np.exp(-((r - c) / w) ** 2)
    return grid.function(values)


def golden_section_longdouble(h, a, b, tol=1e-12):
    """Maximize h on [a, b] by golden-section search in extended precision."""
    a, b = np.longdouble(a), np.longdouble(b)
    gr = (np.sqrt(np.longdouble(5)) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    hc, hd = h(c), h(d)
    while b - a > tol:
        if hc > hd:
            b, d, hd = d, c, hc
            c = b - gr * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, d, hd
            d = a + gr * (b - a)
            hd = h(d)
    return float((a + b) / 2)


def exp_primitive_longdouble(s, lam, p, alpha):
    s = np.asarray(s, dtype=np.longdouble)
    x2 = np.longdouble(alpha) * s * s
    term, total = np.ones_like(s), np.zeros_like(s)
    for k in range(1, 400):
        term = term * x2 / k
        total += term / (2 * k + p + 1)
    return np.longdouble(lam) * s ** (p + 1) * total


def homogeneous_setup(grid, kernel, A_target, I2_target):
    """Profile and Q with ||u||^2 = A_target and I_2 = D(Q u^2, Q u^2)/2 = I2_target for F(s) = s^2."""
    u = grid.sample(lambda r: np.exp(-r**2))
    u = u * math.sqrt(A_target / y_norm_sq(u, PotentialSpec.constant(1.0, "V")))
    sq = u.values**2
    I2_unit = 0.5 * float(sq @ kernel.K @ sq)
    Q = PotentialSpec.constant(math.sqrt(I2_target / I2_unit), "Q")
    return u, ProblemSpec(kernel.mu, PotentialSpec.constant(1.0, "V"), Q, pure_power(2.0))


def golden_section_t_star(u, spec, kernel, t_guess):
    """Independent fibering maximizer for the exponential family: golden section on [t/2, 2t] in long double."""
    Kl = kernel.K.astype(np.longdouble)
    ul = u.values.astype(np.longdouble)
    A = np.longdouble(y_norm_sq(u, spec.V))
    q = spec.Q(u.grid.nodes).astype(np.longdouble)
    p = spec.f.params

    def h(s):
        g = q * exp_primitive_longdouble(s * ul, p["lam"], p["p"], spec.f.alpha0)
        return s * s * A / 2 - g @ Kl @ g / 2

    return golden_section_longdouble(h, 0.5 * t_guess, 2.0 * t_guess)
