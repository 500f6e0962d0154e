"""Two-periodic triangular logistic map on the unit square.

    F_n(x, y) = (mu_n x (1 - x), nu_n y (1 - y) x)
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..analysis import SpectrumClassification, classify_spectrum
from ..core import Box, CoordinateMap, PeriodWarning, TriangularMap, TriangularSystem, compose
from ..roots import isolate_roots

__all__ = [
    "LogisticParams",
    "LogisticFixedPoints",
    "LogisticStability",
    "logistic_system",
    "logistic_1d_system",
    "logistic_individual_fixed_points",
    "logistic_composition_fixed_points",
    "logistic_spectra_and_regions",
    "reality_polynomial",
    "cardano_x_star",
]


@dataclass(frozen=True)
class LogisticParams:
    mu: tuple[float, float] = (2.0, 2.5)
    nu: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        if len(self.mu) != 2 or len(self.nu) != 2:
            raise ValueError("mu and nu each need two values")
        if min(self.mu + self.nu) <= 0:
            raise ValueError("mu_i and nu_i must be positive")

    @property
    def self_map(self) -> bool:
        """[0,1]^2 is invariant under every F_n."""
        return max(self.mu) <= 4 and max(self.nu) <= 4

    @property
    def eventually_bounded(self) -> bool:
        return all(m <= 4 and m * n <= 16 for m, n in zip(self.mu, self.nu))


def _coords(mu: float, nu: float) -> tuple[CoordinateMap, CoordinateMap]:
    fx = CoordinateMap(1, lambda x: mu * x * (1.0 - x), (lambda x: mu * (1.0 - 2.0 * x),))
    fy = CoordinateMap(
        2,
        lambda x, y: nu * y * (1.0 - y) * x,
        (lambda x, y: nu * y * (1.0 - y), lambda x, y: nu * x * (1.0 - 2.0 * y)),
    )
    return fx, fy


def logistic_system(params: LogisticParams | None = None) -> TriangularSystem:
    params = params or LogisticParams()
    if not params.self_map:
        warnings.warn(f"logistic parameters {params} do not keep [0,1]^2 invariant", RuntimeWarning, stacklevel=2)
    pairs = [_coords(m, n) for m, n in zip(params.mu, params.nu)]
    xs = [pairs[0][0]] if params.mu[0] == params.mu[1] else [c[0] for c in pairs]
    ys = [pairs[0][1]] if params.nu[0] == params.nu[1] else [c[1] for c in pairs]
    if len(xs) == 1 and len(ys) == 1:
        warnings.warn("equal rates: logistic system is autonomous (p = 1)", PeriodWarning, stacklevel=2)
    return TriangularSystem.from_coordinate_sequences([xs, ys], Box.unit(2), name="logistic")


def logistic_1d_system(mu: float = 3.3) -> TriangularSystem:
    """Autonomous scalar logistic map as a one-dimensional triangular system."""
    c = CoordinateMap(1, lambda x: mu * x * (1.0 - x), (lambda x: mu * (1.0 - 2.0 * x),))
    return TriangularSystem((TriangularMap((c,), Box.unit(1)),), (1,), name="logistic-1d")


def logistic_individual_fixed_points(params: LogisticParams, i: int) -> dict:
    """Fixed points of the single map F_i and their stability predicates."""
    mu, nu = params.mu[i], params.nu[i]
    x1 = (mu - 1.0) / mu
    e2y = (mu + (1.0 - mu) * nu) / ((1.0 - mu) * nu) if mu != 1.0 else float("nan")
    s = x1 * nu
    return {
        "E0": np.zeros(2),
        "E1": np.array([x1, 0.0]),
        "E2": np.array([x1, e2y]),
        "E1_admissible": 0.0 <= x1 <= 1.0,
        "E2_admissible": 0.0 <= x1 <= 1.0 and 0.0 <= e2y <= 1.0,
        "stable": {
            "E0": mu <= 1.0,
            "E1": 1.0 < mu <= 3.0 and s <= 1.0,
            "E2": 1.0 < mu <= 3.0 and 1.0 < s <= 3.0,
        },
    }


def reality_polynomial(mu0, mu1):
    """Sign factor of Delta_2; x* has a real-radical form where this is >= 0."""
    return (4 - mu1) * mu1 * mu0**2 - 2 * mu1 * (9 - 2 * mu1) * mu0 + 27


def deltas(mu0, mu1):
    d1 = 2 * mu1**3 * mu0**6 - 9 * mu1**3 * mu0**5 + 27 * mu1**2 * mu0**4
    d2 = mu0**8 * mu1**4 * reality_polynomial(mu0, mu1)
    return d1, d2


def cardano_x_star(mu0: float, mu1: float, imag_tol: float = 1e-12) -> float | None:
    """Non-zero axis fixed point of the two-step composition in radical form.

    With Delta_2 >= 0 the radicand is real and its signed real cube root is
    taken.  Otherwise the cubic has three real roots and the principal
    complex branch is evaluated; the result is real up to rounding, and the
    imaginary dust is dropped when below ``imag_tol``.
    """
    d1, d2 = deltas(mu0, mu1)
    a = np.cbrt(4.0) / (6 * mu0**2 * mu1)
    b = np.cbrt(2.0) * (mu0 - 3) * mu0 * mu1 / 3
    if d2 >= 0:
        s = 3.0 * np.sqrt(3.0) * np.sqrt(d2)
        # either sign of the square root gives the same root; the larger
        # radicand avoids cancellation (it is exactly 0 at mu0 = 3)
        w = d1 + s if abs(d1 + s) >= abs(d1 - s) else d1 - s
        cr = np.cbrt(w)
        if cr == 0.0:
            # triple root (mu0 = mu1 = 3): b vanishes with the radicand
            return 2 / 3 if b == 0.0 else None
        return float(2 / 3 - a * cr - b / cr)
    w = complex(d1) + 3.0 * np.sqrt(3.0) * np.sqrt(complex(d2))
    cr = w ** (1 / 3)
    x = 2 / 3 - a * cr - b / cr
    if abs(x.imag) > imag_tol * max(1.0, abs(x.real)):
        return None
    return float(x.real)


@dataclass(frozen=True)
class LogisticFixedPoints:
    delta1: float
    delta2: float
    real: bool  # Delta_2 >= 0
    x_star: float | None
    e0: np.ndarray
    e1: np.ndarray | None  # None when x* is unavailable or outside [0,1]
    e2: tuple[np.ndarray, ...] = ()  # interior points, y solved numerically
    psi_provenance: str = field(default="numeric")


def logistic_composition_fixed_points(
    params: LogisticParams | None = None, grid_density: int = 512, tol: float = 1e-12
) -> LogisticFixedPoints:
    params = params or LogisticParams()
    mu0, mu1 = params.mu
    d1, d2 = deltas(mu0, mu1)
    x = cardano_x_star(mu0, mu1)
    e1 = None
    e2: list[np.ndarray] = []
    if x is not None and -1e-12 <= x <= 1.0 + 1e-12:
        x = min(max(x, 0.0), 1.0)
        e1 = np.array([x, 0.0])
        if x > 0.0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                op = compose(logistic_system(params), 0, 2)

            def g(y):
                X = np.vstack([np.full(np.size(y), x), y])
                return op(X)[1] - y

            scan = isolate_roots(g, 0.0, 1.0, grid_density, tol=tol)
            e2 = [np.array([x, y]) for y in scan.roots if y > 1e-9]
    return LogisticFixedPoints(float(d1), float(d2), bool(d2 >= 0), x, np.zeros(2), e1, tuple(e2))


def e1_multipliers(mu0: float, mu1: float, nu0: float, nu1: float, x: float) -> tuple[float, float]:
    """Diagonal of the two-step Jacobian at (x, 0)."""
    lam_x = mu0 * mu1 * (1 - 2 * x) * (1 + 2 * mu0 * x * (x - 1))
    lam_y = mu0 * x**2 * (1 - x) * nu0 * nu1
    return lam_x, lam_y


def e2_multipliers(mu0, mu1, nu0, nu1, x, psi) -> tuple[float, float]:
    lam_x, lam_y0 = e1_multipliers(mu0, mu1, nu0, nu1, x)
    return lam_x, lam_y0 * (1 - 2 * psi) * (1 + 2 * psi * (psi - 1) * x * nu0)


@dataclass(frozen=True)
class LogisticStability:
    fixed_points: LogisticFixedPoints
    spectra: dict  # name -> SpectrumClassification (E2 entries named E2[0], ...)
    table2: dict  # name -> bool
    margins: dict  # name -> min |predicate value - 1|
    table1: tuple[dict, dict]


def logistic_spectra_and_regions(
    params: LogisticParams | None = None, center_tol: float = 1e-8
) -> LogisticStability:
    """Closed-form spectra of the two-step composition and stability predicates.

    E1 is stable when both |lambda_x| < 1 and |lambda_y| < 1 at (x*, 0); the
    E2 conditions replace the y multiplier by its value at (x*, y*).
    """
    params = params or LogisticParams()
    mu0, mu1 = params.mu
    nu0, nu1 = params.nu
    fp = logistic_composition_fixed_points(params)
    spectra: dict[str, SpectrumClassification] = {}
    table2: dict[str, bool] = {}
    margins: dict[str, float] = {}

    e0 = (0.0, mu0 * mu1)
    spectra["E0"] = classify_spectrum(np.diag(e0), center_tol)
    table2["E0"] = mu0 * mu1 < 1
    margins["E0"] = abs(mu0 * mu1 - 1)

    if fp.e1 is not None:
        lam = e1_multipliers(mu0, mu1, nu0, nu1, fp.x_star)
        spectra["E1"] = classify_spectrum(np.diag(lam), center_tol)
        table2["E1"] = abs(lam[0]) < 1 and abs(lam[1]) < 1
        margins["E1"] = min(abs(abs(v) - 1) for v in lam)
    for i, pt in enumerate(fp.e2):
        lam = e2_multipliers(mu0, mu1, nu0, nu1, pt[0], pt[1])
        spectra[f"E2[{i}]"] = classify_spectrum(np.diag(lam), center_tol)
        table2[f"E2[{i}]"] = abs(lam[0]) < 1 and abs(lam[1]) < 1
        margins[f"E2[{i}]"] = min(abs(abs(v) - 1) for v in lam)
    t1 = tuple(logistic_individual_fixed_points(params, i)["stable"] for i in (0, 1))
    return LogisticStability(fp, spectra, table2, margins, t1)
