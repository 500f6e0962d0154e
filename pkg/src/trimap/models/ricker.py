"""Periodic hierarchical Ricker-type model and its k-dimensional version.

    F_n(x, y) = (x exp(r_n (1 - x)), y exp(s_n (1 - y - mu x)))

with r of period 3 and s of period 2, so the system has period 6.  The
k-dimensional version uses

    f_{j,n}(x) = x_j exp(r_{j,n} (1 - x_j - sum_{i<j} mu_i x_i)).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..analysis import SpectrumClassification, classify_spectrum
from ..core import Box, CoordinateMap, PeriodWarning, TriangularSystem

__all__ = [
    "RickerParams",
    "RickerKParams",
    "RickerStability",
    "ricker_system",
    "ricker_k_system",
    "ricker_common_fixed_points",
    "ricker_stability_and_generalization",
    "ricker_box",
]


def _check_rates(name: str, rates) -> tuple[float, ...]:
    rates = tuple(float(v) for v in rates)
    if not rates:
        raise ValueError(f"{name} needs at least one rate")
    if not all(0 < v <= 2 for v in rates):
        raise ValueError(f"{name} rates must lie in (0, 2], got {rates}")
    return rates


@dataclass(frozen=True)
class RickerParams:
    r: tuple[float, float, float] = (1.2, 1.5, 1.8)
    s: tuple[float, float] = (1.5, 1.0)
    mu: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "r", _check_rates("r", self.r))
        object.__setattr__(self, "s", _check_rates("s", self.s))
        if len(self.r) != 3 or len(self.s) != 2:
            raise ValueError("r needs 3 values (period 3), s needs 2 (period 2)")
        if not 0 <= self.mu < 1:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu}")

    def to_k(self) -> RickerKParams:
        return RickerKParams(rates=(self.r, self.s), mu=(self.mu,))


@dataclass(frozen=True)
class RickerKParams:
    """``rates[j]`` is the rate sequence of coordinate j+1 (its length is the period)."""

    rates: tuple[tuple[float, ...], ...] = ((1.2, 1.5, 1.8), (1.5, 1.0), (1.5, 1.0))
    mu: tuple[float, ...] = (0.5, 0.5)

    def __post_init__(self):
        rates = tuple(_check_rates(f"rates[{j}]", seq) for j, seq in enumerate(self.rates))
        mu = tuple(float(v) for v in self.mu)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "mu", mu)
        if len(mu) != len(rates) - 1:
            raise ValueError(f"{len(rates)} coordinates need {len(rates) - 1} interaction weights")
        if not all(0 <= m < 1 for m in mu):
            raise ValueError(f"interaction weights must lie in [0, 1), got {mu}")

    @property
    def k(self) -> int:
        return len(self.rates)


def _coord(j: int, r: float, mu: tuple[float, ...]) -> CoordinateMap:
    """Coordinate j (1-based) with growth rate r and weights mu_1..mu_{j-1}."""
    w = mu[: j - 1]

    def expo(*xs):
        s = 1.0 - xs[j - 1]
        for i, m in enumerate(w):
            s = s - m * xs[i]
        return np.exp(r * s)

    def f(*xs):
        return xs[j - 1] * expo(*xs)

    def partial(m):
        if m == j:
            return lambda *xs: expo(*xs) * (1.0 - r * xs[j - 1])
        return lambda *xs: -r * w[m - 1] * xs[j - 1] * expo(*xs)

    return CoordinateMap(j, f, tuple(partial(m) for m in range(1, j + 1)))


def ricker_box(params: RickerKParams) -> Box:
    """Absorbing box with upper bound max_n exp(r_n - 1)/r_n per coordinate."""
    return Box((0.0,) * params.k, tuple(max(math.exp(r - 1) / r for r in seq) for seq in params.rates))


def ricker_k_system(params: RickerKParams | None = None, name: str | None = None) -> TriangularSystem:
    params = params or RickerKParams()
    seqs = [[_coord(j, r, params.mu) for r in seq] for j, seq in enumerate(params.rates, start=1)]
    return TriangularSystem.from_coordinate_sequences(
        seqs, Box.orthant(params.k), name=name or f"ricker-{params.k}d", search_box=ricker_box(params)
    )


def ricker_system(params: RickerParams | None = None) -> TriangularSystem:
    """Six-periodic planar system (r period 3, s period 2)."""
    return ricker_k_system((params or RickerParams()).to_k(), name="ricker")


def ricker_common_fixed_points(params: RickerParams | None = None) -> dict[str, np.ndarray]:
    params = params or RickerParams()
    return {
        "O": np.array([0.0, 0.0]),
        "E_x": np.array([1.0, 0.0]),
        "E_y": np.array([0.0, 1.0]),
        "C*": np.array([1.0, 1.0 - params.mu]),
    }


def interior_fixed_point(mu: tuple[float, ...]) -> np.ndarray:
    """(1, 1-mu_1, (1-mu_1)(1-mu_2), ...)."""
    return np.concatenate([[1.0], np.cumprod([1.0 - m for m in mu])])


@dataclass(frozen=True)
class RickerStability:
    c_star: np.ndarray
    residual: float  # max over n of |F_n(C*) - C*|
    conditions: dict  # (j, n) -> bool for 0 < r_{j,n} C*_j <= 2
    satisfied: bool
    spectra: tuple[SpectrumClassification, ...]  # JF_n at C*, one per map


def ricker_stability_and_generalization(
    params: RickerParams | RickerKParams | None = None, center_tol: float = 1e-8
) -> RickerStability:
    """Local stability of the interior common fixed point.

    The diagonal of JF_n at C* is 1 - r_{j,n} C*_j, so every eigenvalue lies
    in the closed unit disk exactly when 0 < r_{j,n} C*_j <= 2.
    """
    params = params or RickerParams()
    kp = params.to_k() if isinstance(params, RickerParams) else params
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PeriodWarning)
        system = ricker_k_system(kp)
    c = interior_fixed_point(kp.mu)
    residual = max(float(np.max(np.abs(F(c) - c))) for F in system.maps)
    conds = {}
    for j, seq in enumerate(kp.rates):
        for n, r in enumerate(seq):
            conds[(j + 1, n)] = 0 < r * c[j] <= 2
    spectra = tuple(classify_spectrum(F.jacobian(c), center_tol) for F in system.maps)
    return RickerStability(c, residual, conds, all(conds.values()), spectra)
