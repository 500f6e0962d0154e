"""Dense root isolation for scalar equations on an interval."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

__all__ = ["RootScan", "isolate_roots"]


@dataclass
class RootScan:
    roots: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    degenerate: bool = False
    grid_density: int = 0


def _newton(g, dg, x, lo, hi, tol, maxiter=60):
    for _ in range(maxiter):
        gx = g(x)
        if not np.isfinite(gx):
            return None
        if abs(gx) < tol:
            return x
        d = dg(x) if dg is not None else (g(x + 1e-8) - g(x - 1e-8)) / 2e-8
        if not np.isfinite(d) or d == 0.0:
            return None
        x_new = x - gx / d
        if not lo <= x_new <= hi:
            return None
        if x_new == x:
            break
        x = x_new
    return x if abs(g(x)) < tol else None


def isolate_roots(
    g: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n: int = 256,
    *,
    dg: Callable[[float], float] | None = None,
    tol: float = 1e-12,
    dedup: float = 1e-7,
    degenerate_fraction: float = 0.5,
) -> RootScan:
    """Find the roots of ``g`` on ``[lo, hi]`` by grid bracketing.

    ``g`` must accept a numpy array.  Brackets are closed with Brent's
    method and polished with Newton; grid nodes where ``g`` vanishes are
    roots themselves and get probed on both sides so that a root sitting
    just beside such a node is not lost.  Local minima of ``|g|`` without
    a sign change seed a Newton attempt, which catches tangential roots.

    Only roots with ``|g| < tol`` are kept.  If more than
    ``degenerate_fraction`` of the grid cells produce roots the equation is
    treated as a continuum: the scan is flagged and the roots found so far
    are returned deduplicated.
    """
    if n < 2:
        raise ValueError("grid density must be at least 2")
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    scalar = lambda t: float(g(np.array([t]))[0])  # noqa: E731
    xs = np.linspace(lo, hi, n)
    with np.errstate(all="ignore"):
        gs = np.asarray(g(xs), dtype=float)
    finite = np.isfinite(gs)
    cands: list[float] = []
    hits = 0

    zero = finite & (np.abs(gs) < tol)
    for i in np.flatnonzero(zero):
        cands.append(float(xs[i]))
    hits += int(zero.sum())

    def close(a, b):
        try:
            with np.errstate(all="ignore"):
                r = brentq(scalar, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (ValueError, RuntimeError):
            return None
        if dg is not None:
            polished = _newton(scalar, dg, r, lo, hi, tol, maxiter=3)
            if polished is not None:
                r = polished
        return r

    s = np.sign(gs)
    for i in range(n - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if s[i] * s[i + 1] < 0:
            hits += 1
            r = close(xs[i], xs[i + 1])
            if r is not None:
                cands.append(r)

    # probe beside exact-zero nodes
    h = (hi - lo) / (n - 1)
    eta = 1e-6 * h
    for i in np.flatnonzero(zero):
        for nb, side in ((i + 1, 1.0), (i - 1, -1.0)):
            if not 0 <= nb < n or not finite[nb] or zero[nb]:
                continue
            probe = xs[i] + side * eta
            with np.errstate(all="ignore"):
                gp = scalar(probe)
            if np.isfinite(gp) and gp * gs[nb] < 0:
                a, b = sorted((probe, xs[nb]))
                r = close(a, b)
                if r is not None:
                    cands.append(r)

    # tangential roots: local minima of |g| with no adjacent sign change
    ag = np.where(finite, np.abs(gs), np.inf)
    for i in range(1, n - 1):
        if zero[i] or not finite[i]:
            continue
        if ag[i] <= ag[i - 1] and ag[i] <= ag[i + 1]:
            if s[i - 1] * s[i] < 0 or s[i] * s[i + 1] < 0:
                continue
            r = _newton(scalar, dg, float(xs[i]), lo, hi, tol)
            if r is not None:
                cands.append(r)

    degenerate = hits > degenerate_fraction * (n - 1)
    cands.sort()
    roots: list[float] = []
    for r in cands:
        if roots and abs(r - roots[-1]) < dedup:
            continue
        roots.append(r)
    with np.errstate(all="ignore"):
        res = [abs(scalar(r)) for r in roots]
    keep = [(r, e) for r, e in zip(roots, res) if e < tol]
    return RootScan(
        roots=[r for r, _ in keep],
        residuals=[e for _, e in keep],
        degenerate=degenerate,
        grid_density=n,
    )
