"""Fixed points, cycles, spectra and global-convergence checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.cluster.hierarchy import fclusterdata

from .core import Box, CompositionOperator, Orbit, TriangularSystem, compose
from .roots import isolate_roots

__all__ = [
    "Verdict",
    "Scenario",
    "SpectrumClassification",
    "CycleRecord",
    "FixedPointList",
    "Period2Result",
    "CoppelResult",
    "OmegaLimit",
    "ConvergenceReport",
    "SelfMapError",
    "jacobian",
    "classify_spectrum",
    "find_fixed_points",
    "find_periodic_orbits",
    "periodic_orbits_by_period",
    "period2_absence_test",
    "coppel_1d_test",
    "omega_limit_estimate",
    "verify_global_convergence",
    "scenario_classify",
    "sample_grid",
]

MATCH_TOL = 1e-7


class Verdict(str, enum.Enum):
    SINK = "sink"
    SOURCE = "source"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non-hyperbolic"


class Scenario(str, enum.Enum):
    COMMON_FIXED_POINT = "common-fixed-point"
    CYCLE = "cycle"
    GEOMETRIC_CYCLE = "geometric-cycle"
    SUPER_PERIOD = "super-period"


class SelfMapError(ValueError):
    """The scalar map does not send the interval into itself."""


@dataclass(frozen=True)
class SpectrumClassification:
    eigenvalues: np.ndarray
    n_stable: int
    n_center: int
    n_unstable: int
    verdict: Verdict
    center_tol: float

    @property
    def requires_manual_analysis(self) -> bool:
        # spectral data cannot decide stability on the center directions
        return self.verdict is Verdict.NON_HYPERBOLIC

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in np.real(self.eigenvalues)],
            "n_stable": self.n_stable,
            "n_center": self.n_center,
            "n_unstable": self.n_unstable,
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class CycleRecord:
    """A located periodic orbit of the system.

    ``points[m]`` is the orbit point at absolute phase ``phase + m``.  When the
    search window does not span whole periods the orbit need not close, in
    which case ``period`` and ``scenario`` are None and ``points`` holds the
    single fixed point of the window.
    """

    phase: int
    period: int | None
    points: np.ndarray  # shape (q, k)
    residuals: np.ndarray  # shape (q,)
    window: int
    spectrum: SpectrumClassification
    scenario: Scenario | None = None
    subwindow_residuals: tuple[float, ...] = ()

    @property
    def point(self) -> np.ndarray:
        return self.points[0]


class FixedPointList(list):
    """List of :class:`CycleRecord` with search metadata."""

    def __init__(self, records=(), degenerate: bool = False, grid_density: tuple[int, ...] = ()):
        super().__init__(records)
        self.degenerate = degenerate
        self.grid_density = grid_density


def jacobian(op: CompositionOperator, x, method: str = "auto") -> np.ndarray:
    """Chain-rule Jacobian of the window composition at ``x``.

    The per-map Jacobians are lower-triangular, so the product is too; the
    upper triangle is zeroed explicitly.
    """
    x = np.asarray(x, dtype=float)
    J = np.eye(op.k)
    for F, xn in zip(op.maps(), op.partial_orbit(x)):
        J = F.jacobian(xn, method) @ J
    if not np.all(np.isfinite(J)):
        raise FloatingPointError(f"non-finite Jacobian along the partial orbit of {x.tolist()}")
    return np.tril(J)


def classify_spectrum(J, center_tol: float = 1e-8) -> SpectrumClassification:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError("Jacobian must be square")
    if np.any(np.triu(J, 1)):
        eig = np.linalg.eigvals(J)
    else:
        eig = np.diag(J).copy()
    mod = np.abs(eig)
    n_c = int(np.sum(np.abs(mod - 1.0) <= center_tol))
    n_s = int(np.sum(mod < 1.0 - center_tol))
    n_u = int(np.sum(mod > 1.0 + center_tol))
    if n_c:
        verdict = Verdict.NON_HYPERBOLIC
    elif n_u == 0:
        verdict = Verdict.SINK
    elif n_s == 0:
        verdict = Verdict.SOURCE
    else:
        verdict = Verdict.SADDLE
    return SpectrumClassification(eig, n_s, n_c, n_u, verdict, center_tol)


def _per_axis(density, k: int) -> tuple[int, ...]:
    if isinstance(density, (int, np.integer)):
        return (int(density),) * k
    density = tuple(int(d) for d in density)
    if len(density) == 1:
        return density * k
    if len(density) != k:
        raise ValueError(f"need {k} grid densities, got {len(density)}")
    return density


def _max_norm(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _polish(op: CompositionOperator, x: np.ndarray, tol: float, steps: int = 8) -> np.ndarray:
    """Newton on Phi(X) - X using the triangular Jacobian."""
    for _ in range(steps):
        r = op(x) - x
        if np.max(np.abs(r)) < tol:
            break
        try:
            A = jacobian(op, x) - np.eye(op.k)
            dx = np.linalg.solve(A, -r)
        except (np.linalg.LinAlgError, FloatingPointError):
            break
        x = x + dx
    return x


def find_fixed_points(
    op: CompositionOperator,
    search_box: Box | None = None,
    grid_density=128,
    newton_tol: float = 1e-12,
    center_tol: float = 1e-8,
    dedup_tol: float = MATCH_TOL,
) -> FixedPointList:
    """Fixed points of a window composition by cascade root-finding.

    The composition is triangular, so ``Phi(X) = X`` is solved one
    coordinate at a time: roots of ``phi_1(x_1) = x_1`` on a dense grid,
    then for each of them the roots of ``phi_2(x_1, x_2) = x_2``, and so on.
    Coordinates beyond the one being solved are held at the box's lower
    bound; triangularity makes their value irrelevant.
    """
    system = op.system
    box = search_box or system.sampling_box()
    if not box.bounded:
        raise ValueError("search box must be bounded")
    k = op.k
    dens = _per_axis(grid_density, k)
    if min(dens) < 2:
        raise ValueError("grid density must be at least 2 per axis")
    lo = np.asarray(box.lower)
    degenerate = False
    prefixes: list[list[float]] = [[]]
    for j in range(k):
        nxt = []
        for prefix in prefixes:
            fixed = np.array(prefix + [0.0] + list(lo[j + 1 :]))

            def g(t, _fixed=fixed, _j=j):
                X = np.repeat(_fixed[:, None], np.size(t), axis=1)
                X[_j] = t
                with np.errstate(all="ignore"):
                    return op(X)[_j] - t

            def dg(t, _fixed=fixed, _j=j):
                X = _fixed.copy()
                X[_j] = t
                try:
                    return jacobian(op, X)[_j, _j] - 1.0
                except FloatingPointError:
                    return float("nan")

            scan = isolate_roots(
                g, box.lower[j], box.upper[j], dens[j], dg=dg, tol=newton_tol, dedup=dedup_tol
            )
            degenerate |= scan.degenerate
            nxt.extend(prefix + [r] for r in scan.roots)
        prefixes = nxt

    points = []
    for pref in prefixes:
        x = np.array(pref)
        with np.errstate(all="ignore"):
            if _max_norm(op(x), x) >= newton_tol:
                x = _polish(op, x, newton_tol)
            res = _max_norm(op(x), x)
        if not res < newton_tol:
            continue
        if any(_max_norm(x, y) < dedup_tol for y in points):
            continue
        points.append(x)

    # a located point whose Jacobian cannot be evaluated is an error, not a
    # skipped cell: dropping it would hide it from period-2 comparisons
    records = [_make_record(op, x, center_tol) for x in points]
    return FixedPointList(records, degenerate=degenerate, grid_density=dens)


def _prime_period(traj: np.ndarray, total: int, tol: float = MATCH_TOL) -> int:
    """Smallest divisor d of ``total`` with X_{m+d} = X_m along ``traj``."""
    for d in range(1, total + 1):
        if total % d:
            continue
        if all(_max_norm(traj[m + d], traj[m]) < tol for m in range(total - d + 1)):
            return d
    return total


def _make_record(op: CompositionOperator, x: np.ndarray, center_tol: float) -> CycleRecord:
    system = op.system
    spec = classify_spectrum(jacobian(op, x), center_tol)
    if not op.closes:
        res = np.array([_max_norm(op(x), x)])
        return CycleRecord(op.phase, None, x[None, :], res, op.total_length, spec)
    total = op.total_length
    traj = [x]
    for n in range(total):
        traj.append(system[op.phase + n](traj[-1]))
    traj = np.array(traj)
    q = _prime_period(traj, total)
    pts = traj[:q].copy()
    res = np.array(
        [_max_norm(CompositionOperator(system, (op.phase + m) % system.p, total)(pts[m]), pts[m]) for m in range(q)]
    )
    rec = CycleRecord(op.phase, q, pts, res, total, spec)
    scen = scenario_classify(system, rec)
    sub = ()
    if scen is Scenario.CYCLE:
        # each sub-window of length q along one period must fix the point
        m = system.p // q
        sub = tuple(
            _max_norm(compose(system, (op.phase + j * q) % system.p, q)(pts[0]), pts[0]) for j in range(m)
        )
    return replace(rec, scenario=scen, subwindow_residuals=sub)


def scenario_classify(system: TriangularSystem, record: CycleRecord, tol: float = MATCH_TOL) -> Scenario:
    """Label a cycle by how its prime period relates to the system period."""
    q, p = record.period, system.p
    if q is None:
        raise ValueError("record does not describe a closed orbit")
    if q == 1:
        x = record.points[0]
        if all(_max_norm(F(x), x) < tol for F in system.maps):
            return Scenario.COMMON_FIXED_POINT
        # period one along the orbit means fixed by every map; reaching here
        # means the residual tolerance was exceeded somewhere
        return Scenario.CYCLE if p > 1 else Scenario.COMMON_FIXED_POINT
    if q == p:
        return Scenario.GEOMETRIC_CYCLE
    if q < p and p % q == 0:
        return Scenario.CYCLE
    return Scenario.SUPER_PERIOD


def _is_time_shift(a: CycleRecord, b: CycleRecord, p: int, tol: float = MATCH_TOL) -> bool:
    """True when ``b`` is ``a`` started a whole number of periods later."""
    if a.period != b.period:
        return False
    q = a.period
    L = math.lcm(q, p)
    for shift in range(0, L, p):
        idx = (shift + b.phase - a.phase) % q
        if _max_norm(a.points[idx], b.points[0]) < tol:
            return True
    return False


def find_periodic_orbits(
    system: TriangularSystem,
    phase: int,
    target_period: int,
    search_box: Box | None = None,
    grid_density=128,
    newton_tol: float = 1e-12,
    center_tol: float = 1e-8,
) -> list[CycleRecord]:
    """Orbits of prime period exactly ``target_period`` starting at ``phase``.

    Searches the window of length ``lcm(q, p)`` and keeps the closed orbits
    whose prime period is ``q``; copies of one cycle shifted by whole
    periods are reported once.
    """
    return periodic_orbits_by_period(
        system, phase, [target_period], search_box, grid_density, newton_tol, center_tol
    )[int(target_period)]


def periodic_orbits_by_period(
    system: TriangularSystem,
    phase: int,
    periods: Sequence[int],
    search_box: Box | None = None,
    grid_density=128,
    newton_tol: float = 1e-12,
    center_tol: float = 1e-8,
) -> dict[int, list[CycleRecord]]:
    """:func:`find_periodic_orbits` for several periods, one solve per window."""
    qs = [int(q) for q in periods]
    if any(q < 1 for q in qs):
        raise ValueError("target period must be >= 1")
    solved: dict[int, FixedPointList] = {}
    out: dict[int, list[CycleRecord]] = {}
    for q in qs:
        L = math.lcm(q, system.p)
        if L not in solved:
            solved[L] = find_fixed_points(compose(system, phase, L), search_box, grid_density, newton_tol, center_tol)
        recs: list[CycleRecord] = []
        for rec in solved[L]:
            if rec.period != q or any(_is_time_shift(o, rec, system.p) for o in recs):
                continue
            recs.append(rec)
        out[q] = recs
    return out


@dataclass(frozen=True)
class Period2Result:
    absent: bool
    witnesses: list[np.ndarray]
    unlisted_fixed: list[np.ndarray]
    grid_density: tuple[int, ...]
    degenerate: bool

    def __bool__(self) -> bool:
        return self.absent


def period2_absence_test(
    op: CompositionOperator,
    known_fixed: Sequence | None = None,
    search_box: Box | None = None,
    grid_density=128,
    tol: float = 1e-12,
    match_tol: float = MATCH_TOL,
) -> Period2Result:
    """Search ``op o op`` for fixed points that ``op`` does not fix.

    Returns ``absent=True`` when every root coincides with a known fixed
    point.  Roots that ``op`` fixes but that are missing from
    ``known_fixed`` are reported separately and are not witnesses.  The
    verdict is only as good as the grid; ``grid_density`` is echoed so that
    callers can refine.
    """
    if known_fixed is None:
        known = [r.point for r in find_fixed_points(op, search_box, grid_density, tol)]
    else:
        known = [np.asarray(x, dtype=float) for x in known_fixed]
    roots = find_fixed_points(op.squared(), search_box, grid_density, tol)
    witnesses, unlisted = [], []
    for rec in roots:
        w = rec.point
        if any(_max_norm(w, x) < match_tol for x in known):
            continue
        if _max_norm(op(w), w) > 10 * tol:
            witnesses.append(w)
        else:
            unlisted.append(w)
    return Period2Result(
        absent=not witnesses,
        witnesses=witnesses,
        unlisted_fixed=unlisted,
        grid_density=roots.grid_density,
        degenerate=roots.degenerate,
    )


@dataclass(frozen=True)
class CoppelResult:
    verdict: str  # "converges-globally" | "period-2-exists"
    fixed_points: list[float]
    witnesses: list[float]
    degenerate: bool = False

    @property
    def converges(self) -> bool:
        return self.verdict == "converges-globally"


def coppel_1d_test(
    f: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    grid_density: int = 4001,
    tol: float = 1e-12,
    self_map_samples: int = 1001,
    self_map_tol: float = 1e-12,
) -> CoppelResult:
    """Decide global convergence of a continuous interval map.

    Every orbit converges to a fixed point when ``f(f(x)) = x`` has no
    roots other than the fixed points of ``f``.  ``f`` must be vectorised.
    """
    a, b = map(float, interval)
    xs = np.linspace(a, b, self_map_samples)
    ys = np.asarray(f(xs), dtype=float)
    bad = ~np.isfinite(ys) | (ys < a - self_map_tol) | (ys > b + self_map_tol)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise SelfMapError(f"f({xs[i]:.6g}) = {ys[i]:.6g} leaves [{a}, {b}]")
    fixed = isolate_roots(lambda x: f(x) - x, a, b, grid_density, tol=tol)
    twice = isolate_roots(lambda x: f(f(x)) - x, a, b, grid_density, tol=tol)
    wit = []
    for r in twice.roots:
        if any(abs(r - z) < MATCH_TOL for z in fixed.roots):
            continue
        if abs(float(f(np.array([r]))[0]) - r) > 10 * tol:
            wit.append(r)
    verdict = "period-2-exists" if wit else "converges-globally"
    return CoppelResult(verdict, fixed.roots, wit, fixed.degenerate or twice.degenerate)


@dataclass(frozen=True)
class OmegaLimit:
    points: np.ndarray  # cluster representatives, shape (c, k)
    counts: np.ndarray
    tail_length: int
    unresolved: bool  # tail did not settle: most points are isolated

    def __len__(self) -> int:
        return len(self.points)


def omega_limit_estimate(orbit: Orbit, cluster_tol: float = 1e-6) -> OmegaLimit:
    """Cluster the tail of an orbit to estimate its omega-limit set.

    The tail is the last 20% of the trajectory (at least ``10 p`` points).
    Clusters use single linkage in the max-norm; each is represented by its
    most recent member.
    """
    traj = orbit.trajectory
    n = len(traj)
    m = min(n, max(math.ceil(0.2 * n), 10 * orbit.period))
    tail = traj[n - m :]
    if m == 1:
        labels = np.array([1])
    else:
        labels = fclusterdata(tail, t=cluster_tol, criterion="distance", metric="chebyshev", method="single")
    order = []
    for lab in labels:
        if lab not in order:
            order.append(lab)
    reps, counts = [], []
    for lab in order:
        idx = np.flatnonzero(labels == lab)
        reps.append(tail[idx[-1]])
        counts.append(len(idx))
    return OmegaLimit(np.array(reps), np.array(counts), m, unresolved=len(order) > max(orbit.period, m // 2))


def sample_grid(box: Box, density, interior: bool = True) -> np.ndarray:
    """Tensor grid over ``box`` as an array of shape ``(k, N)``.

    ``interior=True`` uses cell centres, so no sample sits on the boundary.
    """
    if not box.bounded:
        raise ValueError("sampling box must be bounded")
    dens = _per_axis(density, box.dim)
    axes = []
    for (lo, hi), n in zip(box.pairs(), dens):
        if interior:
            axes.append(lo + (np.arange(n) + 0.5) * (hi - lo) / n)
        else:
            axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


# assignment codes for samples that reached no target
ESCAPED, UNCONVERGED, DIVERGED = -1, -2, -3


@dataclass(frozen=True)
class ConvergenceReport:
    samples: np.ndarray  # (N, k)
    assignment: np.ndarray  # (N,) target index or a negative code
    steps: np.ndarray  # (N,) map applications until assignment
    final_states: np.ndarray  # (N, k)
    in_domain: np.ndarray  # (N,) bool
    fraction: float
    max_iters_used: int
    tol: float
    grid: dict = field(default_factory=dict)

    @property
    def nonconvergent(self) -> np.ndarray:
        return np.flatnonzero(self.in_domain & (self.assignment < 0))

    def counts(self) -> dict[int, int]:
        vals, cnt = np.unique(self.assignment[self.in_domain], return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}


def _aligned_points(rec: CycleRecord, phase: int, p: int) -> np.ndarray:
    """Target points the orbit may sit on at snapshots of absolute phase ``phase``."""
    q = rec.period or 1
    L = math.lcm(q, p)
    idx = sorted({(phase - rec.phase + s) % q for s in range(0, L, p)})
    return rec.points[idx]


def verify_global_convergence(
    system: TriangularSystem,
    targets: Sequence[CycleRecord],
    box: Box | None = None,
    density=50,
    max_iters: int = 10_000,
    tol: float = 1e-6,
    phase: int = 0,
    interior: bool = True,
    jitter: float = 0.0,
    seed: int | None = None,
    samples: np.ndarray | None = None,
) -> ConvergenceReport:
    """Iterate a grid of initial states and record which target each reaches.

    A sample is assigned to the nearest target once its state at a snapshot
    with the starting phase lies within ``tol`` (max-norm) of one of that
    target's phase-aligned points.  Snapshots are taken every ``p`` steps,
    beginning with the initial state.
    """
    box = box or system.sampling_box()
    if samples is None:
        X0 = sample_grid(box, density, interior)
        if jitter:
            rng = np.random.default_rng(seed)
            span = (np.asarray(box.upper) - np.asarray(box.lower))[:, None]
            n = np.asarray(_per_axis(density, box.dim))[:, None]
            X0 = X0 + jitter * span / n * (rng.random(X0.shape) - 0.5)
            X0 = np.clip(X0, np.asarray(box.lower)[:, None], np.asarray(box.upper)[:, None])
    else:
        X0 = np.asarray(samples, dtype=float)
        if X0.ndim == 1:
            X0 = X0[None, :]
    p = system.p
    N = X0.shape[1]
    aligned = [_aligned_points(t, phase, p) for t in targets]
    owner = np.concatenate([[i] * len(a) for i, a in enumerate(aligned)]) if aligned else np.zeros(0, int)
    tpts = np.concatenate(aligned, axis=0) if aligned else np.zeros((0, system.k))

    in_domain = system.domain.contains(X0)
    assignment = np.full(N, UNCONVERGED)
    steps = np.zeros(N, dtype=int)
    final = X0.copy()
    active = np.flatnonzero(in_domain)
    X = X0[:, active].copy()
    n = 0
    used = 0

    def check(X, active):
        if len(tpts) == 0 or X.shape[1] == 0:
            return np.zeros(X.shape[1], bool)
        d = np.max(np.abs(X.T[:, None, :] - tpts[None, :, :]), axis=2)
        best = np.argmin(d, axis=1)
        hit = d[np.arange(len(best)), best] < tol
        assignment[active[hit]] = owner[best[hit]]
        steps[active[hit]] = n
        final[:, active[hit]] = X[:, hit]
        return hit

    hit = check(X, active)
    X, active = X[:, ~hit], active[~hit]
    while n < max_iters and active.size:
        with np.errstate(all="ignore"):
            X = system.maps[(phase + n) % p](X)
        n += 1
        used = n
        bad = ~np.all(np.isfinite(X), axis=0)
        if bad.any():
            assignment[active[bad]] = DIVERGED
            steps[active[bad]] = n
            final[:, active[bad]] = X[:, bad]
        out = ~bad & ~system.domain.contains(X)
        if out.any():
            assignment[active[out]] = ESCAPED
            steps[active[out]] = n
            final[:, active[out]] = X[:, out]
        keep = ~(bad | out)
        X, active = X[:, keep], active[keep]
        if n % p == 0:
            hit = check(X, active)
            X, active = X[:, ~hit], active[~hit]
    if active.size:
        final[:, active] = X
        steps[active] = n
    n_dom = int(in_domain.sum())
    n_ok = int(np.sum(in_domain & (assignment >= 0)))
    return ConvergenceReport(
        samples=X0.T.copy(),
        assignment=assignment,
        steps=steps,
        final_states=final.T.copy(),
        in_domain=in_domain,
        fraction=n_ok / n_dom if n_dom else float("nan"),
        max_iters_used=used,
        tol=tol,
        grid={
            "box": box.pairs(),
            "density": list(_per_axis(density, box.dim)) if samples is None else [N],
            "interior": interior,
            "phase": phase,
        },
    )
