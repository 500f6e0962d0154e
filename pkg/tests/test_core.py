import math
import warnings

import numpy as np
import pytest

from trimap import (
    Box,
    CompositionOperator,
    ConvergenceRule,
    CoordinateMap,
    DomainError,
    EvaluationError,
    NonFiniteError,
    PeriodWarning,
    TriangularMap,
    TriangularSystem,
    compose,
    evaluate,
    identity_system,
    iterate_orbit,
    system_period,
)
from trimap.models import leslie_gower_system, ricker_system

from oracles import iterate, lg_map, ricker_map


def scalar_system(*fs, domain=None):
    """Autonomous-in-y system: x-coordinate cycles through ``fs``, y is halved."""
    domain = domain or Box.orthant(2)
    xs = [CoordinateMap(1, f) for f in fs]
    ys = [CoordinateMap(2, lambda x, y: 0.5 * y)]
    return TriangularSystem.from_coordinate_sequences([xs, ys], domain)


def test_box_contains_broadcasts():
    box = Box((0.0, 0.0), (1.0, math.inf))
    pts = np.array([[0.5, 1.5, 0.0], [3.0, 1.0, -1e-9]])
    assert box.contains(pts).tolist() == [True, False, False]
    assert box.contains(pts, atol=1e-8).tolist() == [True, False, True]
    assert not box.bounded
    assert box.finite_part().upper == (1.0, 2.0)


def test_box_rejects_empty():
    with pytest.raises(ValueError):
        Box((1.0,), (0.0,))


def test_coordinate_map_only_sees_prefix():
    seen = []
    c = CoordinateMap(2, lambda *xs: seen.append(len(xs)) or xs[0] + xs[1])
    assert c(1.0, 2.0, 99.0) == 3.0
    assert seen == [2]


def test_coordinate_map_partials_count():
    with pytest.raises(ValueError):
        CoordinateMap(2, lambda x, y: x * y, (lambda x, y: y,))


def test_triangular_map_slot_order():
    c1 = CoordinateMap(1, lambda x: x)
    with pytest.raises(ValueError):
        TriangularMap((c1, c1), Box.unit(2))


@pytest.mark.parametrize(
    "periods,p",
    [([1], 1), ([2, 3], 6), ([3, 2], 6), ([2, 4], 4), ([1, 1, 1], 1), ([4, 6, 5], 60)],
)
def test_system_period_is_lcm(periods, p):
    assert system_period(periods) == p


@pytest.mark.parametrize("bad", [[], [0], [2, -1], [1.5]])
def test_system_period_rejects(bad):
    with pytest.raises(ValueError):
        system_period(bad)


def test_system_checks_map_count():
    F = identity_system(2).maps[0]
    with pytest.raises(ValueError, match="lcm"):
        TriangularSystem((F,), (2, 1))


def test_short_period_detected():
    f = lambda x: 0.5 * x
    with pytest.warns(PeriodWarning, match="period 1"):
        sys_ = scalar_system(f, f)
    assert sys_.short_periods == ((1, 2, 1),)


def test_distinct_maps_no_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error", PeriodWarning)
        sys_ = scalar_system(lambda x: 0.5 * x, lambda x: 0.25 * x)
    assert sys_.p == 2 and sys_.short_periods == ()


def test_ricker_indexing_mod_p():
    sys_ = ricker_system()
    assert sys_.p == 6
    assert sys_[7] is sys_.maps[1]
    x = np.array([0.3, 0.7])
    for n in range(6):
        assert np.allclose(sys_[n](x), ricker_map(n, *x), rtol=0, atol=1e-15)


def test_evaluate_checks():
    F = leslie_gower_system().maps[0]
    with pytest.raises(EvaluationError):
        evaluate(F, [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        evaluate(F, [-0.1, 0.5])
    assert np.all(np.isfinite(evaluate(F, [-0.1, 0.5], permissive=True)))


def test_evaluate_nonfinite_names_coordinate():
    sys_ = scalar_system(lambda x: 1.0 / x)
    with pytest.raises(NonFiniteError) as exc:
        evaluate(sys_.maps[0], [0.0, 1.0])
    assert exc.value.coordinate == 1


def test_composition_order_and_vectorisation():
    sys_ = leslie_gower_system()
    op = compose(sys_, 1, 3)
    assert op.indices() == [1, 0, 1]
    pts = np.array([[0.3, 1.1, 2.0], [0.2, 0.9, 0.1]])
    out = op(pts)
    for i in range(3):
        ref = iterate(lambda n, x, y: lg_map(n, x, y), pts[0, i], pts[1, i], 1, 3)
        assert np.allclose(out[:, i], ref, rtol=1e-15, atol=0)


def test_composition_closes_and_squares():
    sys_ = ricker_system()
    assert compose(sys_, 2, 6).closes
    assert not compose(sys_, 0, 4).closes
    sq = compose(sys_, 0, 3).squared()
    assert sq.total_length == 6 and sq.closes
    assert sq.indices() == [0, 1, 2, 0, 1, 2]


def test_composition_rejects_bad_phase():
    with pytest.raises(ValueError):
        CompositionOperator(leslie_gower_system(), 2, 2)


def test_identity_system_is_identity():
    sys_ = identity_system(3)
    x = np.array([0.1, 0.2, 0.3])
    assert np.array_equal(sys_.maps[0](x), x)
    assert np.array_equal(sys_.maps[0].jacobian(x), np.eye(3))


def test_jacobian_analytic_matches_fd():
    F = leslie_gower_system().maps[1]
    x = np.array([0.8, 1.3])
    Ja, Jf = F.jacobian(x), F.jacobian(x, method="fd")
    assert Ja[0, 1] == 0.0 and Jf[0, 1] == 0.0
    assert np.allclose(Ja, Jf, rtol=1e-7, atol=1e-10)


def test_iterate_orbit_matches_plain_loop():
    sys_ = leslie_gower_system()
    orb = iterate_orbit(sys_, [0.7, 0.4], phase=1, steps=25, stop=None)
    x, y = 0.7, 0.4
    for n in range(25):
        x, y = lg_map(n + 1, x, y)
        assert np.allclose(orb.trajectory[n + 1], (x, y), rtol=1e-15, atol=0)
    assert orb.phase_of(3) == 0


def test_iterate_orbit_convergence_step():
    sys_ = ricker_system()
    orb = iterate_orbit(sys_, [1.0, 0.5], steps=30)
    assert orb.converged and orb.converged_step == 0
    assert len(orb.trajectory) == 7  # halts once X_6 == X_0 is seen


def test_iterate_orbit_no_halt_keeps_going():
    orb = iterate_orbit(ricker_system(), [1.0, 0.5], steps=30, stop=ConvergenceRule(halt=False))
    assert orb.steps == 30 and orb.converged_step == 0


def test_iterate_orbit_escape_and_divergence():
    esc = scalar_system(lambda x: x - 0.4)
    orb = iterate_orbit(esc, [1.0, 1.0], steps=10, stop=None)
    assert orb.escaped and orb.trajectory[-1][0] < 0 and orb.steps == 3

    div = scalar_system(lambda x: np.where(x > 1.5, np.inf, 2 * x))
    orb = iterate_orbit(div, [1.0, 1.0], steps=10, stop=None)
    assert orb.diverged and np.all(np.isfinite(orb.trajectory))


def test_iterate_orbit_start_outside_domain():
    with pytest.raises(DomainError):
        iterate_orbit(leslie_gower_system(), [-1.0, 0.0])
