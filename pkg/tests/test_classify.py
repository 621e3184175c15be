import math

import numpy as np
import pytest

from hyperem.classify import (Report, Side, SignClass, classify_solution, classify_trajectory,
                              count_intersections, count_zeros, count_zeros_verified,
                              find_separatrix, first_zero, first_zero_map, intersections,
                              probe_side, riccati_certificate, ultimate_zero_check,
                              zero_count_threshold)
from hyperem.diagnostics import DecayLaw
from hyperem.errors import DegenerateComparisonError, DomainError, UnsupportedRegimeError
from hyperem.exact import exact_ground_state
from hyperem.geometry import Params, RegimeTag
from hyperem.ode import Termination, integrate, integrate_euclidean

S0_ORACLE = 4.352874595946075


@pytest.fixture(scope="module")
def ground_state():
    return exact_ground_state(3, "B")


def test_count_examples():
    assert count_zeros(integrate(Params(3, 6, 1.0), 100.0))[0] == 0
    k, zeros = count_zeros(integrate(Params(3, 2, 6.5), 60.0))
    assert k == 1 and len(zeros) == 1
    # the step budget ends the oscillating run early; the count is already far above 10
    t = integrate(Params(3, 0.5, 1.0), 60.0)
    assert count_zeros(t)[0] >= 10


@pytest.mark.parametrize("alpha, expected", [(1.0, 0), (6.5, 1), (20.0, None), (50.0, None)])
def test_zero_count_stable_under_refinement(alpha, expected):
    chk = count_zeros_verified(Params(3, 2, alpha), 60.0)
    assert chk.stable
    if expected is not None:
        assert chk.count == expected


def test_intersections_with_ground_state(ground_state):
    t = integrate(Params(3, 2, 1.0), 30.0)
    assert count_intersections(t, ground_state) == 1
    t = integrate(Params(3, 2, 20.0), 10.0)
    z = t.zeros[0].r
    assert count_intersections(t, ground_state, r_range=(0.0, z)) == 1


def test_intersection_locations_are_crossings(ground_state):
    t = integrate(Params(3, 2, 1.0), 30.0)
    (r0,) = intersections(t, ground_state)
    assert abs(t.evaluate(r0)[0] - ground_state.evaluate(r0)[0]) < 1e-9


def test_degenerate_comparisons(ground_state):
    t = integrate(Params(3, 2, 1.0), 10.0)
    with pytest.raises(DegenerateComparisonError):
        count_intersections(t, t)
    with pytest.raises(DegenerateComparisonError):
        count_intersections(ground_state, ground_state)
    with pytest.raises(DomainError):
        count_intersections(t, integrate(Params(3, 6, 1.0), 10.0))


def test_classify_examples():
    rep = classify_solution(Params(3, 6, 2.0))
    assert rep.sign_class is SignClass.POSITIVE_FOREVER
    assert rep.decay.law is DecayLaw.POLYNOMIAL_SLOW
    assert rep.separatrix_side is Side.NOT_APPLICABLE

    rep = classify_solution(Params(3, 2, 1.0), r_max=400.0)
    assert rep.sign_class is SignClass.POSITIVE_FOREVER
    assert rep.decay.law is DecayLaw.POLYNOMIAL_SLOW
    assert rep.decay.fitted_constant == pytest.approx(2.0, rel=0.05)
    assert rep.separatrix_side is Side.BELOW

    rep = classify_solution(Params(3, 0.5, 1.0), r_max=20.0)
    assert rep.sign_class is SignClass.OSCILLATORY_INFINITE
    assert rep.regime.tag is RegimeTag.SUBLINEAR


def test_classify_sign_changing_and_symmetry():
    rep = classify_solution(Params(3, 2, 20.0), r_max=100.0)
    assert rep.sign_class is SignClass.SIGN_CHANGING
    assert rep.zero_count == len(rep.zeros) >= 1
    assert rep.separatrix_side is Side.ABOVE
    neg = classify_solution(Params(3, 2, -1.0))
    assert neg.sign_class is SignClass.NEGATIVE_FOREVER
    assert classify_solution(Params(3, 2, 0.0)).sign_class is SignClass.TRIVIAL


def test_classify_never_raises_on_termination():
    t = integrate(Params(3, 0.5, 1.0), 60.0, max_steps=500)
    rep = classify_trajectory(t)
    assert rep.termination is Termination.MAX_STEPS
    assert rep.r_end < 60.0


def test_report_invariants():
    rep = classify_solution(Params(3, 2, 20.0), r_max=30.0)
    d = rep.to_dict()
    assert d["zero_count"] == len(d["zeros"])
    assert d["sign_class"] == "SignChanging"
    assert classify_solution(Params(3, 2, 20.0), r_max=30.0) == rep
    with pytest.raises(ValueError):
        Report(rep.params, rep.regime, rep.sign_class, rep.zero_count + 1, rep.decay,
               rep.separatrix_side, rep.zeros, rep.r_max_used, rep.tol_used, rep.termination,
               rep.r_end)


@pytest.mark.parametrize("n, p, bracket, expected, tol", [
    (3, 2.0, (1.0, 2.0), 6.0, 0.01),
    (3, 1.5, (1.0, 2.0), 9.0, 0.01),
    (4, 5 / 3, (1.0, 2.0), 12 ** 1.5, 0.05),
])
def test_separatrix(n, p, bracket, expected, tol):
    res = find_separatrix(n, p, bracket)
    assert res.converged
    assert abs(float(res) - expected) < tol
    assert res.lo <= res.alpha_star <= res.hi
    assert res.trace[0].decision == "Below"


def test_separatrix_matches_closed_forms_from_other_brackets():
    res = find_separatrix(3, 2.0, (5.0, 8.0), tol_alpha=1e-4)
    assert abs(res.alpha_star - 6.0) < 1e-3
    res = find_separatrix(3, 2.0, (10.0, 20.0))
    assert abs(res.alpha_star - 6.0) < 0.01


def test_separatrix_requires_subcritical():
    with pytest.raises(UnsupportedRegimeError):
        find_separatrix(3, 6.0)
    with pytest.raises(UnsupportedRegimeError):
        find_separatrix(3, 0.5)
    with pytest.raises(DomainError):
        find_separatrix(3, 2.0, (2.0, 1.0))


def test_probe_sides():
    assert probe_side(3, 2.0, 5.9).side is Side.BELOW
    assert probe_side(3, 2.0, 6.1).side is Side.ABOVE


def test_first_zero_map_decreasing():
    rows = first_zero_map(3, 2.0, [50, 7, 20, 10])
    assert [r.alpha for r in rows] == [7.0, 10.0, 20.0, 50.0]
    assert all(r.in_domain for r in rows)
    rs = [r.r_alpha for r in rows]
    assert all(a > b for a, b in zip(rs, rs[1:]))


def test_first_zero_out_of_domain():
    (row,) = first_zero_map(3, 2.0, [3.0])
    assert not row.in_domain and math.isnan(row.r_alpha)


def test_first_zero_blowup_scaling():
    s0 = integrate_euclidean(3, 2.0, 1.0, 10.0, tol=1e-12).zeros[0].r
    assert s0 == pytest.approx(S0_ORACLE, rel=1e-9)
    r = first_zero(3, 2.0, 1e4)
    assert abs(r * 1e4 ** 0.5 - s0) / s0 < 0.02


def test_first_zero_grows_near_separatrix():
    rs = [first_zero(3, 2.0, 6.0 + d) for d in (1e-1, 1e-3, 1e-5)]
    assert rs[0] < rs[1] < rs[2]
    assert rs[2] > 5.0


def test_zero_count_thresholds():
    a1 = zero_count_threshold(3, 2.0, 1, alpha_hi=1e3)
    a2 = zero_count_threshold(3, 2.0, 2, alpha_hi=1e3)
    a5 = zero_count_threshold(3, 2.0, 5, alpha_hi=1e3)
    for res in (a1, a2, a5):
        assert res.status == "EXPLORATORY"
    assert abs(a1.alpha_k - 6.0) < 0.01
    assert a1.alpha_k < a2.alpha_k < a5.alpha_k
    refined = zero_count_threshold(3, 2.0, 2, alpha_hi=1e3, tol=1e-11)
    assert abs(refined.alpha_k - a2.alpha_k) < 2e-3


def test_threshold_bracket_must_straddle():
    with pytest.raises(DomainError):
        zero_count_threshold(3, 2.0, 1, alpha_hi=5.0, alpha_lo=1.0, n_scan=4)
    with pytest.raises(DomainError):
        zero_count_threshold(3, 2.0, 0, alpha_hi=100.0)


@pytest.mark.parametrize("alpha", [7.0, 10.0, 20.0])
def test_no_zero_after_tail_anchor(alpha):
    t = integrate(Params(3, 2, alpha), 60.0)
    tail = ultimate_zero_check(t)
    assert tail.anchor is not None
    assert tail.zeros_after == 0
    assert tail.bounded_below
    assert tail.eps < 1.0


def test_riccati_certificate():
    t = integrate(Params(3, 2, 1.0), 40.0)
    assert riccati_certificate(t) is not None
    t = integrate(Params(3, 2, 20.0), 40.0)
    r = riccati_certificate(t, t.zeros[-1].r)
    assert r is not None and r > t.zeros[-1].r


def test_sign_changing_tail_is_negative_for_one_zero():
    t = integrate(Params(3, 2, 6.5), 200.0)
    assert len(t.zeros) == 1
    assert np.all(t.u[t.r > t.zeros[0].r + 1e-9] < 0)


def test_sturm_ordering():
    # four positive profiles on the window; larger data cross earlier
    alphas = (5.0, 4.0, 3.0, 2.0, 1.5)
    trajs = {a: integrate(Params(3, 2, a), 10.0) for a in alphas}
    assert all(not t.zeros for t in trajs.values())
    first = [intersections(trajs[a], trajs[b])[0] for a, b in zip(alphas, alphas[1:])]
    assert all(x <= y for x, y in zip(first, first[1:]))
