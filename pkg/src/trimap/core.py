"""Triangular maps, periodic systems, orbits and window compositions.

Points are numpy arrays whose leading axis is the coordinate axis, so a
single point has shape ``(k,)`` and a batch of ``N`` points has shape
``(k, N)``.  Every evaluator in this module broadcasts over the trailing
axes, which is what lets grid scans run vectorised.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "Box",
    "CoordinateMap",
    "TriangularMap",
    "TriangularSystem",
    "CompositionOperator",
    "Orbit",
    "ConvergenceRule",
    "EvaluationError",
    "NonFiniteError",
    "DomainError",
    "PeriodWarning",
    "evaluate",
    "compose",
    "iterate_orbit",
    "system_period",
    "identity_system",
]


class EvaluationError(ValueError):
    """Raised when a map cannot be evaluated at the requested point."""


class NonFiniteError(EvaluationError):
    def __init__(self, coordinate: int, message: str | None = None):
        self.coordinate = coordinate
        super().__init__(message or f"non-finite value in output coordinate {coordinate}")


class DomainError(EvaluationError):
    pass


class PeriodWarning(UserWarning):
    """A coordinate sequence repeats with a shorter period than declared."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box; upper bounds may be ``inf``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise ValueError("lower and upper bounds differ in length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box: lower={lo}, upper={hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> Box:
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def unit(cls, k: int) -> Box:
        return cls((0.0,) * k, (1.0,) * k)

    @classmethod
    def orthant(cls, k: int) -> Box:
        return cls((0.0,) * k, (math.inf,) * k)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(v) for v in self.lower + self.upper)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.lower, self.upper))

    def contains(self, x: np.ndarray, atol: float = 0.0) -> np.ndarray:
        """Membership test; broadcasts over trailing axes of ``x``."""
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lower).reshape((-1,) + (1,) * (x.ndim - 1))
        hi = np.asarray(self.upper).reshape((-1,) + (1,) * (x.ndim - 1))
        return np.all((x >= lo - atol) & (x <= hi + atol), axis=0)

    def finite_part(self, span: float = 2.0) -> Box:
        """Replace infinite bounds by ``lower + span`` (used for sampling)."""
        hi = tuple(h if math.isfinite(h) else lo + span for lo, h in zip(self.lower, self.upper))
        return Box(self.lower, hi)


@dataclass(frozen=True)
class CoordinateMap:
    """Coordinate function ``f_j(x_1, ..., x_j)`` of a triangular map.

    ``func`` is called with exactly the first ``index`` coordinates as
    positional arguments, so it cannot see later coordinates.  ``partials``,
    when given, holds ``index`` callables with the same signature returning
    the partial derivatives with respect to ``x_1 .. x_j``.
    """

    index: int
    func: Callable[..., Any]
    partials: tuple[Callable[..., Any], ...] | None = None

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("coordinate index is 1-based")
        if self.partials is not None:
            object.__setattr__(self, "partials", tuple(self.partials))
            if len(self.partials) != self.index:
                raise ValueError(
                    f"coordinate {self.index} needs {self.index} partials, got {len(self.partials)}"
                )

    def __call__(self, *xs):
        return self.func(*xs[: self.index])

    def partial(self, m: int, *xs):
        """Analytic derivative with respect to ``x_m`` (1-based), or None."""
        if self.partials is None:
            return None
        return self.partials[m - 1](*xs[: self.index])


@dataclass(frozen=True)
class TriangularMap:
    coords: tuple[CoordinateMap, ...]
    domain: Box

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        for slot, c in enumerate(self.coords, start=1):
            if c.index != slot:
                raise ValueError(f"slot {slot} holds coordinate map with index {c.index}")
        if self.domain.dim != len(self.coords):
            raise ValueError("domain dimension does not match number of coordinates")

    @property
    def k(self) -> int:
        return len(self.coords)

    @property
    def has_partials(self) -> bool:
        return all(c.partials is not None for c in self.coords)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        # unchecked, vectorised application
        xs = tuple(x[i] for i in range(self.k))
        out = np.empty(np.shape(x), dtype=float)
        for j, c in enumerate(self.coords):
            out[j] = c(*xs)
        return out

    def jacobian(self, x: np.ndarray, method: str = "auto") -> np.ndarray:
        """Lower-triangular Jacobian at a single point.

        ``method="auto"`` uses analytic partials where a coordinate provides
        them and central differences elsewhere; ``"fd"`` forces differences.
        """
        x = np.asarray(x, dtype=float)
        k = self.k
        J = np.zeros((k, k))
        xs = tuple(float(v) for v in x)
        for j, c in enumerate(self.coords):
            for m in range(j + 1):
                if method != "fd" and c.partials is not None:
                    J[j, m] = c.partial(m + 1, *xs)
                else:
                    h = _FD_STEP * max(1.0, abs(xs[m]))
                    up = list(xs)
                    dn = list(xs)
                    up[m] += h
                    dn[m] -= h
                    J[j, m] = (c(*up) - c(*dn)) / (2.0 * h)
        return J


# cube root of machine epsilon balances truncation and rounding for central differences
_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def system_period(periods: Sequence[int]) -> int:
    """Least common multiple of the per-coordinate periods."""
    periods = list(periods)
    if not periods:
        raise ValueError("need at least one period")
    if any(int(q) != q or q < 1 for q in periods):
        raise ValueError(f"periods must be positive integers, got {periods}")
    return math.lcm(*(int(q) for q in periods))


@dataclass(frozen=True)
class TriangularSystem:
    """A p-periodic sequence ``F_0 .. F_{p-1}`` of triangular maps.

    ``periods[j]`` is the declared period of coordinate ``j+1``.  On
    construction the coordinate sequences are sampled to detect a shorter
    true period; any such coordinate is listed in ``short_periods`` and a
    :class:`PeriodWarning` is emitted.
    """

    maps: tuple[TriangularMap, ...]
    periods: tuple[int, ...]
    name: str = ""
    search_box: Box | None = None
    short_periods: tuple[tuple[int, int, int], ...] = field(default=(), init=False)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "periods", tuple(int(q) for q in self.periods))
        if not self.maps:
            raise ValueError("system needs at least one map")
        k = self.maps[0].k
        if any(F.k != k for F in self.maps):
            raise ValueError("all maps must share the same dimension")
        if len(self.periods) != k:
            raise ValueError(f"expected {k} coordinate periods, got {len(self.periods)}")
        p = system_period(self.periods)
        if len(self.maps) != p:
            raise ValueError(f"lcm of periods is {p} but {len(self.maps)} maps were given")
        if self.search_box is not None and self.search_box.dim != k:
            raise ValueError("search box dimension mismatch")
        short = self._detect_short_periods()
        object.__setattr__(self, "short_periods", short)
        for j, declared, true in short:
            warnings.warn(
                f"{self.name or 'system'}: coordinate {j} declared period {declared} "
                f"but repeats with period {true}",
                PeriodWarning,
                stacklevel=3,
            )

    @classmethod
    def from_coordinate_sequences(
        cls,
        sequences: Sequence[Sequence[CoordinateMap]],
        domain: Box,
        name: str = "",
        search_box: Box | None = None,
    ) -> TriangularSystem:
        """Build ``F_n = (s_1[n mod p_1], ..., s_k[n mod p_k])``."""
        periods = [len(s) for s in sequences]
        p = system_period(periods)
        maps = [
            TriangularMap(tuple(seq[n % len(seq)] for seq in sequences), domain)
            for n in range(p)
        ]
        return cls(tuple(maps), tuple(periods), name=name, search_box=search_box)

    @property
    def k(self) -> int:
        return self.maps[0].k

    @property
    def p(self) -> int:
        return len(self.maps)

    @property
    def domain(self) -> Box:
        return self.maps[0].domain

    def __getitem__(self, n: int) -> TriangularMap:
        return self.maps[n % self.p]

    def sampling_box(self) -> Box:
        if self.search_box is not None:
            return self.search_box
        if self.domain.bounded:
            return self.domain
        return self.domain.finite_part()

    def _detect_short_periods(self) -> tuple[tuple[int, int, int], ...]:
        rng = np.random.default_rng(12345)
        box = self.sampling_box()
        lo = np.asarray(box.lower)[:, None]
        hi = np.asarray(box.upper)[:, None]
        pts = lo + (hi - lo) * rng.random((self.k, 16))
        xs = tuple(pts[i] for i in range(self.k))
        out = []
        with np.errstate(all="ignore"):
            for j, declared in enumerate(self.periods):
                vals = [np.asarray(self.maps[n].coords[j](*xs), dtype=float) for n in range(self.p)]
                for d in _divisors(declared)[:-1]:
                    if all(
                        np.allclose(vals[n], vals[(n + d) % self.p], rtol=1e-13, atol=1e-15, equal_nan=True)
                        for n in range(self.p)
                    ):
                        out.append((j + 1, declared, d))
                        break
        return tuple(out)


def identity_system(k: int, domain: Box | None = None) -> TriangularSystem:
    """Autonomous system whose single map is the identity."""
    domain = domain or Box.unit(k)
    coords = []
    for j in range(1, k + 1):
        partials = tuple(
            (lambda *xs, _m=m, _j=j: np.ones_like(np.asarray(xs[0], dtype=float)) * (1.0 if _m == _j else 0.0))
            for m in range(1, j + 1)
        )
        coords.append(CoordinateMap(j, lambda *xs, _j=j: np.asarray(xs[_j - 1], dtype=float) * 1.0, partials))
    return TriangularSystem((TriangularMap(tuple(coords), domain),), (1,) * k, name="identity")


def _as_point(x, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[0] != k:
        raise EvaluationError(f"expected a point with {k} coordinates, got shape {x.shape}")
    return x


def evaluate(map: TriangularMap, x, permissive: bool = False) -> np.ndarray:
    """Apply ``map`` to ``x`` with dimension, domain and finiteness checks."""
    x = _as_point(x, map.k)
    if not permissive and not np.all(map.domain.contains(x)):
        raise DomainError(f"point {x.tolist()} outside domain {map.domain.pairs()}")
    with np.errstate(all="ignore"):
        y = map(x)
    for j in range(map.k):
        if not np.all(np.isfinite(y[j])):
            raise NonFiniteError(j + 1)
    return y


@dataclass(frozen=True)
class CompositionOperator:
    """Window composition ``F_{i+L-1} o ... o F_i``, optionally repeated.

    ``repeats`` applies the whole window several times; ``op.squared()`` is
    the operator ``op o op`` used by the period-two search.
    """

    system: TriangularSystem
    phase: int
    length: int
    repeats: int = 1

    def __post_init__(self):
        if not 0 <= self.phase < self.system.p:
            raise ValueError(f"phase must lie in [0, {self.system.p}), got {self.phase}")
        if self.length < 1 or self.repeats < 1:
            raise ValueError("window length and repeat count must be >= 1")

    @property
    def k(self) -> int:
        return self.system.k

    @property
    def total_length(self) -> int:
        return self.length * self.repeats

    @property
    def closes(self) -> bool:
        """True when the window spans whole periods, so fixed points are periodic points."""
        return self.total_length % self.system.p == 0

    def indices(self) -> list[int]:
        window = [(self.phase + n) % self.system.p for n in range(self.length)]
        return window * self.repeats

    def maps(self) -> list[TriangularMap]:
        return [self.system.maps[n] for n in self.indices()]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float)
        for F in self.maps():
            y = F(y)
        return y

    def partial_orbit(self, x: np.ndarray) -> list[np.ndarray]:
        """Points visited before each map of the window (length ``total_length``)."""
        pts = [np.asarray(x, dtype=float)]
        for F in self.maps()[:-1]:
            pts.append(F(pts[-1]))
        return pts

    def squared(self) -> CompositionOperator:
        return CompositionOperator(self.system, self.phase, self.length, self.repeats * 2)


def compose(system: TriangularSystem, phase: int, length: int) -> CompositionOperator:
    return CompositionOperator(system, int(phase), int(length))


@dataclass(frozen=True)
class ConvergenceRule:
    """Orbit convergence test comparing ``X_n`` with ``X_{n+p}`` in max-norm."""

    tol: float = 1e-10
    halt: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("convergence tolerance must be positive")


@dataclass(frozen=True)
class Orbit:
    x0: np.ndarray
    phase: int
    period: int
    trajectory: np.ndarray  # shape (N+1, k)
    converged: bool = False
    converged_step: int | None = None
    escaped: bool = False
    diverged: bool = False

    @property
    def steps(self) -> int:
        return len(self.trajectory) - 1

    def phase_of(self, n: int) -> int:
        return (self.phase + n) % self.period


def iterate_orbit(
    system: TriangularSystem,
    x0,
    phase: int = 0,
    steps: int = 1000,
    stop: ConvergenceRule | None = ConvergenceRule(),
    domain_atol: float = 0.0,
) -> Orbit:
    """Iterate ``X_{n+1} = F_{(phase+n) mod p}(X_n)``.

    Leaving the domain through a finite bound marks the orbit escaped (the
    offending point is kept as the last entry); non-finite values mark it
    diverged and are not stored.
    """
    x0 = _as_point(x0, system.k).copy()
    if x0.ndim != 1:
        raise EvaluationError("iterate_orbit takes a single point")
    if not 0 <= phase < system.p:
        raise ValueError(f"phase must lie in [0, {system.p})")
    if not np.all(system.domain.contains(x0, domain_atol)):
        raise DomainError(f"initial point {x0.tolist()} outside domain")
    p = system.p
    traj = [x0]
    converged_step = None
    escaped = diverged = False
    x = x0
    for n in range(steps):
        with np.errstate(all="ignore"):
            y = system.maps[(phase + n) % p](x)
        if not np.all(np.isfinite(y)):
            diverged = True
            break
        traj.append(y)
        x = y
        if not np.all(system.domain.contains(y, domain_atol)):
            escaped = True
            break
        m = len(traj) - 1 - p
        if stop is not None and converged_step is None and m >= 0:
            if np.max(np.abs(traj[m + p] - traj[m])) < stop.tol:
                converged_step = m
                if stop.halt:
                    break
    return Orbit(
        x0=x0,
        phase=phase,
        period=p,
        trajectory=np.array(traj),
        converged=converged_step is not None,
        converged_step=converged_step,
        escaped=escaped,
        diverged=diverged,
    )
