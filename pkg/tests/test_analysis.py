import numpy as np
import pytest

from trimap import (
    Box,
    CoordinateMap,
    Scenario,
    SelfMapError,
    TriangularSystem,
    Verdict,
    classify_spectrum,
    compose,
    coppel_1d_test,
    find_fixed_points,
    find_periodic_orbits,
    iterate_orbit,
    jacobian,
    omega_limit_estimate,
    period2_absence_test,
    periodic_orbits_by_period,
    sample_grid,
    scenario_classify,
    verify_global_convergence,
)
from trimap.analysis import DIVERGED, ESCAPED, UNCONVERGED
from trimap.models import leslie_gower_system, logistic_1d_system, ricker_system

from oracles import logistic_period2_points, mp_jacobian, mp_lg_step

# Leslie-Gower default cycles; frozen from the long-iteration and
# bisection oracles in oracles.py
LG_C2 = np.array([[1.5, 0.75], [1.2, 0.6]])
LG_EX = np.array([[1.5, 0.0], [1.2, 0.0]])
LG_EY = np.array([[0.0, 1.5], [0.0, 1.2]])


def line_system(fs, domain=Box.unit(1)):
    """One-dimensional system with x-maps ``fs`` (period len(fs))."""
    return TriangularSystem.from_coordinate_sequences([[CoordinateMap(1, f) for f in fs]], domain)


def two_cycle_inside_period_four():
    # g(x) = x/2 + 1/2, h(x) = x/2: {1/3, 2/3} is a 2-cycle of the 4-periodic g,h,g,h
    g = lambda x: 0.5 * x + 0.5
    h = lambda x: 0.5 * x
    return line_system([g, h, g, h])


# --- spectra ------------------------------------------------------------


@pytest.mark.parametrize(
    "diag,verdict",
    [
        ((0.5, 0.2), Verdict.SINK),
        ((2.0, -3.0), Verdict.SOURCE),
        ((0.5, 4.0), Verdict.SADDLE),
        ((1.0, 0.5), Verdict.NON_HYPERBOLIC),
        ((-1.0, 3.0), Verdict.NON_HYPERBOLIC),
        ((1.0 + 5e-9, 0.5), Verdict.NON_HYPERBOLIC),
        ((1.0 + 2e-8, 0.5), Verdict.SADDLE),
    ],
)
def test_classify_spectrum(diag, verdict):
    J = np.diag(diag)
    J[1, 0] = 7.0  # the off-diagonal never matters for a triangular matrix
    sc = classify_spectrum(J)
    assert sc.verdict is verdict
    assert sc.n_stable + sc.n_center + sc.n_unstable == 2
    assert sc.requires_manual_analysis == (verdict is Verdict.NON_HYPERBOLIC)


def test_classify_spectrum_full_matrix():
    # rotation by 90 degrees scaled by 0.5: eigenvalues +-0.5i
    sc = classify_spectrum(np.array([[0.0, -0.5], [0.5, 0.0]]))
    assert sc.verdict is Verdict.SINK
    assert np.allclose(np.abs(sc.eigenvalues), 0.5)


def test_chain_rule_jacobian_matches_mpmath():
    sys_ = leslie_gower_system()
    step = mp_lg_step(2.0, 2.0, 0.5, (1.0, 2.0), (1.0, 2.0))
    for pt in ([0.3, 0.9], [1.5, 0.75], [0.0, 1.5]):
        J = jacobian(compose(sys_, 0, 2), np.array(pt))
        assert J[0, 1] == 0.0
        assert np.allclose(J, mp_jacobian(step, pt, 2), rtol=1e-13, atol=1e-14)


def test_jacobian_fd_close_to_analytic():
    op = compose(ricker_system(), 0, 6)
    x = np.array([0.4, 0.3])
    assert np.allclose(jacobian(op, x, "fd"), jacobian(op, x), rtol=1e-6, atol=1e-9)


# --- fixed points and cycles ---------------------------------------------


def test_lg_fixed_points_of_two_step_composition():
    recs = find_fixed_points(compose(leslie_gower_system(), 0, 2))
    pts = sorted((tuple(r.point) for r in recs))
    want = sorted([(0.0, 0.0), tuple(LG_EX[0]), tuple(LG_EY[0]), tuple(LG_C2[0])])
    assert np.allclose(pts, want, atol=1e-12)
    by_point = {tuple(np.round(r.point, 9)): r for r in recs}
    assert by_point[(0.0, 0.0)].scenario is Scenario.COMMON_FIXED_POINT
    assert by_point[(0.0, 0.0)].spectrum.verdict is Verdict.SOURCE
    c2 = by_point[(1.5, 0.75)]
    assert c2.period == 2 and c2.scenario is Scenario.GEOMETRIC_CYCLE
    assert c2.spectrum.verdict is Verdict.SINK
    assert np.allclose(c2.points, LG_C2, atol=1e-12)
    assert max(c2.residuals) < 1e-12


def test_phase_one_search_gives_rotated_cycle():
    recs = find_periodic_orbits(leslie_gower_system(), 1, 2)
    c2 = [r for r in recs if r.points[0, 1] > 0 and r.points[0, 0] > 0]
    assert len(c2) == 1
    assert np.allclose(c2[0].points, LG_C2[::-1], atol=1e-12)


def test_non_closing_window_has_no_period():
    recs = find_fixed_points(compose(leslie_gower_system(), 0, 1))
    assert recs and all(r.period is None and r.scenario is None for r in recs)
    with pytest.raises(ValueError):
        scenario_classify(leslie_gower_system(), recs[0])


def test_cycle_scenario_with_subwindows():
    sys_ = two_cycle_inside_period_four()
    recs = find_periodic_orbits(sys_, 0, 2)
    assert len(recs) == 1
    r = recs[0]
    assert np.allclose(r.points[:, 0], [1 / 3, 2 / 3], atol=1e-14)
    assert r.scenario is Scenario.CYCLE
    assert len(r.subwindow_residuals) == 2 and max(r.subwindow_residuals) < 1e-14
    assert find_periodic_orbits(sys_, 0, 4) == []


def test_super_period_scenario():
    sys_ = logistic_1d_system(3.3)
    recs = find_periodic_orbits(sys_, 0, 2)
    assert len(recs) == 1  # the two phases of the cycle are one orbit
    assert recs[0].scenario is Scenario.SUPER_PERIOD
    assert np.allclose(sorted(recs[0].points[:, 0]), logistic_period2_points(3.3), atol=1e-12)


def test_periods_batch_agrees_with_single_calls():
    sys_ = leslie_gower_system()
    batch = periodic_orbits_by_period(sys_, 0, [1, 2])
    for q in (1, 2):
        single = find_periodic_orbits(sys_, 0, q)
        assert [r.points.tolist() for r in batch[q]] == [r.points.tolist() for r in single]
    assert len(batch[1]) == 1 and len(batch[2]) == 3


def test_ricker_only_common_fixed_points():
    sys_ = ricker_system()
    recs = find_fixed_points(compose(sys_, 0, 6), grid_density=96)
    assert len(recs) == 4
    assert all(r.scenario is Scenario.COMMON_FIXED_POINT for r in recs)
    for q in (2, 3, 6):
        assert find_periodic_orbits(sys_, 0, q, grid_density=96) == []


def test_three_dimensional_cascade():
    from trimap.models import RickerKParams, ricker_k_system

    sys_ = ricker_k_system(RickerKParams(rates=((1.5,), (1.2,), (0.8,)), mu=(0.5, 0.5)))
    recs = find_fixed_points(compose(sys_, 0, 1), grid_density=48)
    pts = {tuple(np.round(r.point, 9)) for r in recs}
    assert (1.0, 0.5, 0.25) in pts
    assert len(pts) == 8  # each species present or absent


# --- period-2 search and the scalar test ---------------------------------


def test_period2_absent_for_leslie_gower():
    res = period2_absence_test(compose(leslie_gower_system(), 0, 2))
    assert res.absent and bool(res) and res.witnesses == []


def test_period2_witnesses_for_logistic():
    res = period2_absence_test(compose(logistic_1d_system(3.3), 0, 1))
    assert not res.absent
    assert np.allclose(sorted(w[0] for w in res.witnesses), logistic_period2_points(3.3), atol=1e-12)


def test_period2_reports_unlisted_fixed_points():
    op = compose(logistic_1d_system(2.8), 0, 1)
    res = period2_absence_test(op, known_fixed=[np.array([0.0])])
    assert res.absent
    assert len(res.unlisted_fixed) == 1 and abs(res.unlisted_fixed[0][0] - 1.8 / 2.8) < 1e-12


def test_coppel_scalar():
    ok = coppel_1d_test(lambda x: 2.8 * x * (1 - x), (0.0, 1.0))
    assert ok.converges and np.allclose(ok.fixed_points, [0.0, 1.8 / 2.8], atol=1e-12)
    bad = coppel_1d_test(lambda x: 3.3 * x * (1 - x), (0.0, 1.0))
    assert bad.verdict == "period-2-exists"
    assert np.allclose(sorted(bad.witnesses), logistic_period2_points(3.3), atol=1e-12)


def test_coppel_requires_self_map():
    with pytest.raises(SelfMapError):
        coppel_1d_test(lambda x: 4.5 * x * (1 - x), (0.0, 1.0))


# --- orbits and basins ----------------------------------------------------


def test_omega_limit_of_lg_orbit():
    orb = iterate_orbit(leslie_gower_system(), [0.7, 0.4], steps=2000, stop=None)
    om = omega_limit_estimate(orb)
    assert len(om) == 2 and not om.unresolved
    assert np.allclose(sorted(om.points.tolist()), sorted(LG_C2.tolist()), atol=1e-9)


def test_omega_limit_of_fixed_orbit():
    orb = iterate_orbit(ricker_system(), [1.0, 0.5], steps=100, stop=None)
    om = omega_limit_estimate(orb)
    assert len(om) == 1 and om.counts[0] == om.tail_length


def test_sample_grid_layout():
    box = Box((0.0, 0.0), (1.0, 2.0))
    G = sample_grid(box, (2, 4))
    assert G.shape == (2, 8)
    assert np.allclose(np.unique(G[0]), [0.25, 0.75])
    assert np.allclose(np.unique(G[1]), [0.25, 0.75, 1.25, 1.75])
    assert sample_grid(box, 3, interior=False)[:, 0].tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        sample_grid(Box.orthant(2), 4)


def test_verify_global_lg_interior():
    sys_ = leslie_gower_system()
    targets = find_fixed_points(compose(sys_, 0, 2))
    rep = verify_global_convergence(sys_, targets, density=20)
    assert rep.fraction == 1.0
    sink = [i for i, t in enumerate(targets) if t.spectrum.verdict is Verdict.SINK]
    assert rep.counts() == {sink[0]: 400}


def test_verify_global_phase_alignment():
    sys_ = leslie_gower_system()
    targets = find_fixed_points(compose(sys_, 0, 2))
    rep = verify_global_convergence(sys_, targets, density=10, phase=1)
    assert rep.fraction == 1.0


def test_verify_global_codes():
    doubling = line_system([lambda x: 2 * x])
    targets = find_fixed_points(compose(doubling, 0, 1))
    rep = verify_global_convergence(doubling, targets, Box.unit(1), density=8, max_iters=50)
    assert set(rep.assignment.tolist()) == {ESCAPED}

    still = line_system([lambda x: x + 0.0])
    rep = verify_global_convergence(still, [], Box.unit(1), density=4, max_iters=5)
    assert set(rep.assignment.tolist()) == {UNCONVERGED} and rep.fraction == 0.0

    blow = line_system([lambda x: np.where(x > 0.5, np.nan, 0.0 * x)], Box((0.0,), (np.inf,)))
    rep = verify_global_convergence(blow, [], Box.unit(1), density=4, max_iters=5)
    assert rep.assignment.tolist() == [UNCONVERGED, UNCONVERGED, DIVERGED, DIVERGED]


def test_verify_global_jitter_deterministic():
    sys_ = leslie_gower_system()
    targets = find_fixed_points(compose(sys_, 0, 2))
    a = verify_global_convergence(sys_, targets, density=6, jitter=0.5, seed=3)
    b = verify_global_convergence(sys_, targets, density=6, jitter=0.5, seed=3)
    c = verify_global_convergence(sys_, targets, density=6, jitter=0.5, seed=4)
    assert np.array_equal(a.samples, b.samples) and not np.array_equal(a.samples, c.samples)
