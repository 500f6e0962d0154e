"""Two-periodic hierarchical Leslie-Gower competition model.

    F_n(x, y) = ( mu K_n x / (K_n + (mu-1) x),
                  alpha L_n y / (L_n + (alpha-1) y + beta x) )

with K_{n+2} = K_n and L_{n+2} = L_n, on the closed first quadrant.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..analysis import SpectrumClassification, classify_spectrum
from ..core import Box, CoordinateMap, PeriodWarning, TriangularSystem

__all__ = [
    "LeslieGowerParams",
    "LeslieGowerCycles",
    "leslie_gower_system",
    "leslie_gower_cycles",
    "leslie_gower_spectra",
    "leslie_gower_box",
]


@dataclass(frozen=True)
class LeslieGowerParams:
    mu: float = 2.0
    alpha: float = 2.0
    beta: float = 0.5
    K: tuple[float, float] = (1.0, 2.0)
    L: tuple[float, float] = (1.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "K", tuple(float(v) for v in self.K))
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        if len(self.K) != 2 or len(self.L) != 2:
            raise ValueError("K and L each need two values (K_0, K_1)")
        if not (self.mu > 1 and self.alpha > 1):
            raise ValueError(f"mu and alpha must exceed 1, got mu={self.mu}, alpha={self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if min(self.K + self.L) <= 0:
            raise ValueError("carrying capacities must be positive")


def _x_map(mu: float, K: float) -> CoordinateMap:
    def f(x):
        return mu * K * x / (K + (mu - 1.0) * x)

    def dfdx(x):
        return mu * (K / (K + (mu - 1.0) * x)) ** 2

    return CoordinateMap(1, f, (dfdx,))


def _y_map(alpha: float, beta: float, L: float) -> CoordinateMap:
    def f(x, y):
        return alpha * L * y / (L + (alpha - 1.0) * y + beta * x)

    def dfdx(x, y):
        D = L + (alpha - 1.0) * y + beta * x
        return -alpha * L * beta * y / (D * D)

    def dfdy(x, y):
        D = L + (alpha - 1.0) * y + beta * x
        return alpha * ((L + beta * x) / D) * (L / D)

    return CoordinateMap(2, f, (dfdx, dfdy))


def leslie_gower_box(params: LeslieGowerParams) -> Box:
    """Absorbing box ``[0, mu K_max/(mu-1)] x [0, alpha L_max/(alpha-1)]``."""
    mu, al = params.mu, params.alpha
    return Box((0.0, 0.0), (mu * max(params.K) / (mu - 1.0), al * max(params.L) / (al - 1.0)))


def leslie_gower_system(params: LeslieGowerParams | None = None) -> TriangularSystem:
    """Build the system; equal capacities collapse the corresponding period to 1."""
    params = params or LeslieGowerParams()
    K, L = params.K, params.L
    xs = [_x_map(params.mu, K[0])] if K[0] == K[1] else [_x_map(params.mu, k) for k in K]
    ys = [_y_map(params.alpha, params.beta, L[0])] if L[0] == L[1] else [
        _y_map(params.alpha, params.beta, l) for l in L
    ]
    if len(xs) == 1 and len(ys) == 1:
        warnings.warn("equal capacities: Leslie-Gower system is autonomous (p = 1)", PeriodWarning, stacklevel=2)
    return TriangularSystem.from_coordinate_sequences(
        [xs, ys], Box.orthant(2), name="leslie-gower", search_box=leslie_gower_box(params)
    )


@dataclass(frozen=True)
class LeslieGowerCycles:
    origin: np.ndarray
    e_x: np.ndarray  # rows (x0, 0), (x1, 0)
    e_y: np.ndarray  # rows (0, y0), (0, y1)
    c2: np.ndarray  # rows (x0, Y0), (x1, Y1)
    A: float
    B: float
    coexistence: bool  # the interior 2-cycle lies in the open first quadrant


def _A_terms(p: LeslieGowerParams) -> list[float]:
    mu, al, be = p.mu, p.alpha, p.beta
    K1 = p.K[1]
    L0, L1 = p.L
    return [
        be**2 * K1**2 * (mu + 1) ** 2,
        be * K1 * (mu + 1) * mu * L0,
        be * K1 * (mu + 1) * L1,
        -(al**2 - 1) * mu * L0 * L1,
    ]


def _B_terms(p: LeslieGowerParams) -> list[float]:
    mu, al, be = p.mu, p.alpha, p.beta
    K1 = p.K[1]
    L0, L1 = p.L
    return [
        be * K1 * (mu + 1) * mu * L1,
        be * K1 * (mu + 1) * L0,
        -(al**2 - 1) * (mu**2 + 1) * L0 * L1,
    ]


def leslie_gower_cycles(params: LeslieGowerParams | None = None) -> LeslieGowerCycles:
    """Closed-form equilibria and two-cycles, ordered phase 0 first."""
    p = params or LeslieGowerParams()
    mu, al, be = p.mu, p.alpha, p.beta
    K0, K1 = p.K
    L0, L1 = p.L
    x0 = K0 * K1 * (mu + 1) / (K0 * mu + K1)
    x1 = K0 * K1 * (mu + 1) / (K1 * mu + K0)
    y0 = (al + 1) * L0 * L1 / (al * L0 + L1)
    y1 = (al + 1) * L0 * L1 / (al * L1 + L0)

    A_terms, B_terms = _A_terms(p), _B_terms(p)
    A, B = math.fsum(A_terms), math.fsum(B_terms)
    # numerator expanded term by term so fsum sees every cancellation
    lead = (al**2 - 1) * K1**2 * mu * L0 * L1
    num = math.fsum([lead] + [-t * K0**2 for t in A_terms] + [-t * K1 * K0 for t in B_terms])
    den0 = (al - 1) * (K0 * mu + K1) * (K0 * (be * K1 * (mu + 1) + al * L0 + L1) + K1 * mu * (al * L0 + L1))
    den1 = (al - 1) * (K1 * mu + K0) * (K0 * (be * K1 * (mu + 1) + mu * (al * L1 + L0)) + K1 * (al * L1 + L0))
    Y0, Y1 = num / den0, num / den1
    return LeslieGowerCycles(
        origin=np.zeros(2),
        e_x=np.array([[x0, 0.0], [x1, 0.0]]),
        e_y=np.array([[0.0, y0], [0.0, y1]]),
        c2=np.array([[x0, Y0], [x1, Y1]]),
        A=A,
        B=B,
        coexistence=num > 0,
    )


def exclusion_quotient(params: LeslieGowerParams) -> float:
    """The y-direction multiplier of the composed map at the x-axis cycle point."""
    mu, al, be = params.mu, params.alpha, params.beta
    K0, K1 = params.K
    L0, L1 = params.L
    num = al**2 * (mu * K0 + K1) * (K0 + mu * K1) * L0 * L1
    den = (K1 * L0 + K0 * (be * (mu + 1) * K1 + mu * L0)) * (mu * K1 * L1 + K0 * (be * (mu + 1) * K1 + L1))
    return num / den


def ey_offdiagonal(params: LeslieGowerParams) -> float:
    mu, al, be = params.mu, params.alpha, params.beta
    L0, L1 = params.L
    return -(al + 1) * be * (al * mu * L0**2 + al * (al * mu + 1) * L1 * L0 + L1**2) / (
        al**2 * (al * L0 + L1) ** 2
    )


def leslie_gower_jacobians(params: LeslieGowerParams | None = None) -> dict[str, np.ndarray]:
    """Closed-form Jacobians of the two-step composition at its four fixed points.

    The lower-left entry at the coexistence point has no closed form here and
    is NaN; spectra only need the diagonal.
    """
    p = params or LeslieGowerParams()
    mu2, al2 = p.mu**2, p.alpha**2
    c = exclusion_quotient(p)
    return {
        "O": np.array([[mu2, 0.0], [0.0, al2]]),
        "E_x": np.array([[1.0 / mu2, 0.0], [0.0, c]]),
        "E_y": np.array([[mu2, 0.0], [ey_offdiagonal(p), 1.0 / al2]]),
        "C*": np.array([[1.0 / mu2, 0.0], [math.nan, 1.0 / c]]),
    }


def leslie_gower_spectra(
    params: LeslieGowerParams | None = None, center_tol: float = 1e-8
) -> dict[str, SpectrumClassification]:
    # triangular: the unknown off-diagonal entry does not affect the spectrum
    return {
        name: classify_spectrum(np.nan_to_num(J, nan=0.0), center_tol)
        for name, J in leslie_gower_jacobians(params).items()
    }
