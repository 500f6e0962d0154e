import numpy as np
import pytest

from trimap import PeriodWarning, Verdict
from trimap.models import (
    LeslieGowerParams,
    leslie_gower_box,
    leslie_gower_cycles,
    leslie_gower_jacobians,
    leslie_gower_spectra,
    leslie_gower_system,
)
from trimap.models.leslie_gower import exclusion_quotient, ey_offdiagonal

from oracles import bh_two_cycle, lg_map, lg_two_cycle_by_iteration, mp_jacobian, mp_lg_step

CASES = [
    dict(),
    dict(mu=3.0, alpha=1.5, beta=0.2, K=(0.7, 2.5), L=(1.3, 0.9)),
    dict(mu=1.4, alpha=3.2, beta=0.8, K=(2.0, 1.1), L=(0.6, 2.2)),
]


def _params(d):
    return LeslieGowerParams(**d)


@pytest.mark.parametrize("case", CASES)
def test_axis_cycles_match_bisection(case):
    p = _params(case)
    cyc = leslie_gower_cycles(p)
    x0 = bh_two_cycle(p.mu, *p.K)
    y0 = bh_two_cycle(p.alpha, *p.L)
    assert abs(cyc.e_x[0, 0] - x0) < 1e-12
    assert abs(cyc.e_y[0, 1] - y0) < 1e-12
    x1, _ = lg_map(0, x0, 0.0, **case)
    assert abs(cyc.e_x[1, 0] - x1) < 1e-12


@pytest.mark.parametrize("case", CASES)
def test_coexistence_cycle_matches_iteration(case):
    p = _params(case)
    cyc = leslie_gower_cycles(p)
    assert cyc.coexistence
    a, b = lg_two_cycle_by_iteration(case)
    assert np.allclose(cyc.c2, [a, b], atol=1e-12)


def test_coexistence_fails_with_strong_competition():
    # large beta*K relative to L pushes the interior cycle out of the quadrant
    p = LeslieGowerParams(mu=3.0, alpha=1.2, beta=0.95, K=(3.0, 3.0), L=(0.5, 0.6))
    cyc = leslie_gower_cycles(p)
    assert not cyc.coexistence and cyc.c2[0, 1] < 0
    assert exclusion_quotient(p) < 1
    assert leslie_gower_spectra(p)["E_x"].verdict is Verdict.SINK


@pytest.mark.parametrize("case", CASES)
def test_closed_form_jacobians_match_mpmath(case):
    p = _params(case)
    step = mp_lg_step(p.mu, p.alpha, p.beta, p.K, p.L)
    cyc = leslie_gower_cycles(p)
    Js = leslie_gower_jacobians(p)
    for name, pt in [("O", cyc.origin), ("E_x", cyc.e_x[0]), ("E_y", cyc.e_y[0]), ("C*", cyc.c2[0])]:
        ref = mp_jacobian(step, pt, 2)
        got = Js[name]
        mask = ~np.isnan(got)
        assert np.allclose(got[mask], ref[mask], rtol=1e-11, atol=1e-13), name
    assert abs(exclusion_quotient(p) - mp_jacobian(step, cyc.e_x[0], 2)[1, 1]) < 1e-12
    assert abs(ey_offdiagonal(p) - mp_jacobian(step, cyc.e_y[0], 2)[1, 0]) < 1e-12


def test_default_spectra():
    sp = leslie_gower_spectra()
    assert [sp[n].verdict for n in ("O", "E_x", "E_y", "C*")] == [
        Verdict.SOURCE,
        Verdict.SADDLE,
        Verdict.SADDLE,
        Verdict.SINK,
    ]
    assert sp["O"].eigenvalues.tolist() == [4.0, 4.0]


def test_box_is_absorbing():
    p = _params(CASES[1])
    sys_ = leslie_gower_system(p)
    box = leslie_gower_box(p)
    rng = np.random.default_rng(1)
    X = rng.random((2, 500)) * np.array(box.upper)[:, None] * 3
    for n in range(2):
        Y = sys_.maps[n](X)
        assert np.all(Y <= np.array(box.upper)[:, None] + 1e-12)


def test_equal_capacities_collapse_period():
    with pytest.warns(PeriodWarning):
        sys_ = leslie_gower_system(LeslieGowerParams(K=(1.0, 1.0), L=(2.0, 2.0)))
    assert sys_.p == 1
    sys_ = leslie_gower_system(LeslieGowerParams(K=(1.0, 1.0), L=(1.0, 2.0)))
    assert sys_.p == 2 and sys_.periods == (1, 2)


@pytest.mark.parametrize(
    "bad",
    [dict(mu=1.0), dict(alpha=0.5), dict(beta=1.0), dict(beta=0.0), dict(K=(1.0,)), dict(L=(1.0, -2.0))],
)
def test_params_validated(bad):
    with pytest.raises(ValueError):
        LeslieGowerParams(**bad)
