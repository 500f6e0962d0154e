"""Independent reference computations used by the test-suite.

Nothing here imports the package under test; the maps are re-typed as
plain scalar Python so that a transcription error would have to be made
twice, in two different styles, to go unnoticed.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np


# --- plain-Python maps -------------------------------------------------------

def lg_map(n, x, y, mu=2.0, alpha=2.0, beta=0.5, K=(1.0, 2.0), L=(1.0, 2.0)):
    Kn, Ln = K[n % 2], L[n % 2]
    return mu * Kn * x / (Kn + (mu - 1) * x), alpha * Ln * y / (Ln + (alpha - 1) * y + beta * x)


def logistic_map(n, x, y, mu=(2.0, 2.5), nu=(0.5, 0.5)):
    m, v = mu[n % 2], nu[n % 2]
    return m * x * (1 - x), v * y * (1 - y) * x


def ricker_map(n, x, y, r=(1.2, 1.5, 1.8), s=(1.5, 1.0), mu=0.5):
    return x * math.exp(r[n % 3] * (1 - x)), y * math.exp(s[n % 2] * (1 - y - mu * x))


def iterate(step, x, y, n0, count):
    for n in range(n0, n0 + count):
        x, y = step(n, x, y)
    return x, y


def lg_two_cycle_by_iteration(params: dict, start=(0.7, 0.4), n=4000):
    """Long forward iteration from an interior point; converges to the sink cycle."""
    x, y = iterate(lambda k, a, b: lg_map(k, a, b, **params), *start, 0, n)
    x1, y1 = lg_map(0, x, y, **params)
    return (x, y), (x1, y1)


def bh_two_cycle(mu, K0, K1):
    """x-axis two-cycle of the alternating Beverton-Holt map by bisection on [eps, big]."""
    f = lambda n, x: mu * (K0, K1)[n] * x / ((K0, K1)[n] + (mu - 1) * x)
    g = lambda x: f(1, f(0, x)) - x
    lo, hi = 1e-9, 10 * mu * max(K0, K1)
    assert g(lo) > 0 > g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- high-precision derivatives ------------------------------------------------

def mp_jacobian(step, point, maps, dps=40):
    """Jacobian of the composition of ``maps`` steps (starting at n=0) via mpmath."""
    mpmath.mp.dps = dps

    def comp(a, b):
        for n in range(maps):
            a, b = step(n, a, b)
        return a, b

    x, y = (mpmath.mpf(v) for v in point)
    J = np.zeros((2, 2))
    for i in range(2):
        J[i, 0] = float(mpmath.diff(lambda t: comp(t, y)[i], x))
        J[i, 1] = float(mpmath.diff(lambda t: comp(x, t)[i], y))
    return J


def mp_lg_step(mu, alpha, beta, K, L):
    def step(n, x, y):
        Kn, Ln = K[n % 2], L[n % 2]
        return mu * Kn * x / (Kn + (mu - 1) * x), alpha * Ln * y / (Ln + (alpha - 1) * y + beta * x)

    return step


# --- logistic --------------------------------------------------------------

def logistic_period2_points(mu):
    """Prime-period-2 points of x -> mu x (1 - x): roots of mu^2 x^2 - mu(mu+1) x + (mu+1)."""
    disc = (mu + 1) * (mu - 3)
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return sorted([((mu + 1) - r) / (2 * mu), ((mu + 1) + r) / (2 * mu)])


def composition_cubic(mu0, mu1):
    """Cubic whose roots are the non-zero fixed points of x -> f_1(f_0(x)) (ascending coefficients)."""
    P = np.polynomial.Polynomial
    f0 = P([0.0, mu0, -mu0])
    g = mu1 * f0 * (1 - f0) - P([0.0, 1.0])
    coef = g.coef
    assert abs(coef[0]) < 1e-15
    return P(coef[1:])


def cubic_discriminant(c):
    d, cc, b, a = c.coef  # ascending
    return 18 * a * b * cc * d - 4 * b**3 * d + b**2 * cc**2 - 4 * a * cc**3 - 27 * a**2 * d**2
