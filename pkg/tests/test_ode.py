import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from hyperem.errors import DomainError, UnsupportedRegimeError
from hyperem.exact import linear_solve
from hyperem.geometry import Params
from hyperem.ode import (Equation, EventKind, State, Termination, integrate, integrate_euclidean,
                         pullback, rescale_curvature, rhs, solve)

# first zero of the flat Lane-Emden profile, n=3, p=2, v(0)=1 (scipy DOP853, rtol 1e-13)
S0_ORACLE = 4.352874595946075


def scipy_reference(n, p, alpha, r_end, r0=1e-4):
    def f(r, y):
        u, v = y
        return [v, -(n - 1) / math.tanh(r) * v - abs(u) ** (p - 1) * u]

    a = -abs(alpha) ** (p - 1) * alpha / (2 * n)
    return solve_ivp(f, [r0, r_end], [alpha + a * r0 ** 2, 2 * a * r0], method="DOP853",
                     rtol=1e-12, atol=1e-14, dense_output=True)


def test_rhs_examples():
    assert rhs(3, 2, State(0.0, 1.0, 0.0)) == (0.0, pytest.approx(-1 / 3, rel=1e-15))
    for n, p in [(3, 2), (5, 0.5), (4, 7)]:
        assert rhs(n, p, State(0.7, 1.0, 0.0))[1] == pytest.approx(-1.0, rel=1e-15)
    # 2 coth(0.5) 0.1 - 0.9^6, evaluated with 30-digit arithmetic
    assert rhs(3, 6, State(0.5, 0.9, -0.1))[1] == pytest.approx(-0.09865031725226943, rel=1e-14)
    with pytest.raises(DomainError):
        rhs(3, 2, State(-1.0, 1.0, 0.0))


def test_damping_series_near_origin():
    eq = Equation(3, 2)
    r = 1e-9
    assert eq.damping(r) == pytest.approx(1 / r + r / 3, rel=1e-15)
    assert eq.damping(0.3) == pytest.approx(1 / math.tanh(0.3), rel=1e-15)


def test_trivial_solution():
    t = integrate(Params(3, 2, 0.0), 10.0)
    assert np.all(t.u == 0) and np.all(t.v == 0)
    assert t.events == ()
    assert t.evaluate(5.0)[:2] == (0.0, 0.0)


def test_supercritical_positive_decreasing():
    t = integrate(Params(3, 6, 1.0), 50.0)
    assert t.termination is Termination.REACHED_RMAX
    assert not t.zeros
    assert np.all(t.u > 0)
    assert np.all(t.v[1:] < 0)


def test_large_data_changes_sign():
    t = integrate(Params(3, 2, 20.0), 30.0)
    assert len(t.zeros) >= 1


def test_samples_layout():
    t = integrate(Params(3, 2, 1.5), 20.0)
    assert (t.r[0], t.u[0], t.v[0]) == (0.0, 1.5, 0.0)
    assert np.all(np.diff(t.r) > 0)
    assert t.r_end == 20.0
    with pytest.raises(ValueError):
        t.u[3] = 0.0


@pytest.mark.parametrize("alpha, r_eval", [(1.0, 5.0), (1.0, 100.0), (10.0, 7.0), (0.3, 40.0)])
def test_matches_scipy_reference(alpha, r_eval):
    ref = scipy_reference(3, 2.0, alpha, r_eval)
    t = integrate(Params(3, 2, alpha), r_eval, tol=1e-12)
    u_ref = ref.sol(r_eval)[0]
    assert t.evaluate(r_eval)[0] == pytest.approx(u_ref, rel=1e-8, abs=1e-12)


def test_frozen_reference_values():
    t = integrate(Params(3, 2, 1.0), 100.0)
    assert t.evaluate(5.0)[0] == pytest.approx(0.2739036577579383, rel=1e-8)
    assert 100 * t.evaluate(100.0)[0] == pytest.approx(1.9000034115804167, rel=1e-7)


def test_series_start_order():
    # r^4 term included: error against the integrated solution is O(r^6)
    eq = Equation(3, 2)
    t = integrate(Params(3, 2, 2.0), 1.0, tol=1e-13)
    for r in (0.02, 0.04):
        u_series, _ = eq.series_start(2.0, r)
        assert abs(u_series - t.evaluate(r)[0]) < 50 * r ** 6


@pytest.mark.parametrize("n, p, alpha", [(3, 2, 20.0), (3, 2, 50.0), (4, 1.5, 30.0),
                                         (3, 0.5, 1.0)])
def test_events_are_consistent(n, p, alpha):
    t = integrate(Params(n, p, alpha), 15.0)
    rs = [e.r for e in t.events]
    assert rs == sorted(rs)
    assert [e.index for e in t.events] == list(range(len(t.events)))
    for z in t.zeros:
        assert abs(z.value) > 1e-12
        assert abs(t.evaluate(z.r)[0]) < 1e-9 * max(1.0, abs(alpha))
    for cp in t.critical_points:
        assert abs(t.evaluate(cp.r)[1]) < 1e-9 * max(1.0, abs(alpha))
    kinds = [e.kind for e in t.events]
    for a, b in zip(kinds, kinds[1:]):
        assert not (a is EventKind.ZERO and b is EventKind.ZERO)


@settings(max_examples=15)
@given(st.floats(0.1, 30.0), st.sampled_from([(3, 2.0), (3, 6.0), (4, 1.5), (3, 0.5)]))
def test_sign_symmetry(alpha, np_pair):
    n, p = np_pair
    a = integrate(Params(n, p, alpha), 8.0)
    b = integrate(Params(n, p, -alpha), 8.0)
    assert np.array_equal(a.r, b.r)
    assert np.max(np.abs(a.u + b.u)) <= 1e-14 * alpha
    assert np.max(np.abs(a.v + b.v)) <= 1e-14 * alpha


@pytest.mark.parametrize("n, p, alpha", [(3, 2, 20.0), (3, 6, 1.0), (5, 2, 3.0)])
def test_weighted_derivative_decreases_while_positive(n, p, alpha):
    t = integrate(Params(n, p, alpha), 10.0)
    end = t.zeros[0].r if t.zeros else t.r_end
    mask = (t.r > 0) & (t.r < end)
    w = np.sinh(t.r[mask]) ** (n - 1) * t.v[mask]
    assert np.all(np.diff(w) < 0)


@pytest.mark.parametrize("n, p, alpha, r_max", [(3, 6, 1.0, 50.0), (3, 2, 1.0, 50.0),
                                                (3, 2, 10.0, 20.0)])
def test_tolerance_convergence(n, p, alpha, r_max):
    tol = 1e-10
    a = integrate(Params(n, p, alpha), r_max, tol)
    b = integrate(Params(n, p, alpha), r_max, tol / 2)
    x = r_max / 2
    ua, ub = a.evaluate(x)[0], b.evaluate(x)[0]
    assert abs(ua - ub) < 10 * tol * abs(ub)


def test_dense_output_derivative_matches_rhs():
    t = integrate(Params(3, 2, 3.0), 10.0)
    x = np.linspace(0.5, 9.5, 37)
    u, v, dv = t.evaluate(x, derivative=True)
    expected = np.array([rhs(3, 2, State(r, a, b))[1] for r, a, b in zip(x, u, v)])
    np.testing.assert_allclose(dv, expected, rtol=1e-6, atol=1e-8)
    with pytest.raises(DomainError):
        t.evaluate(11.0)


def test_euclidean_linear_is_sinc():
    t = integrate_euclidean(3, 1.0, 1.0, 4.0, tol=1e-12, linear_weight=1.0)
    assert abs(t.zeros[0].r - math.pi) < 1e-8
    x = np.linspace(0.1, 4.0, 40)
    np.testing.assert_allclose(t.evaluate(x)[0], np.sin(x) / x, atol=1e-10)
    assert t.v[0] == 0.0


def test_euclidean_lane_emden_first_zero():
    s_a = integrate_euclidean(3, 2, 1.0, 10.0, tol=1e-10).zeros[0].r
    s_b = integrate_euclidean(3, 2, 1.0, 10.0, tol=1e-12).zeros[0].r
    assert abs(s_a - s_b) < 1e-8
    assert s_b == pytest.approx(S0_ORACLE, rel=1e-9)


def _blowup_error(lam, n=3, p=2.0, s_max=4.0):
    q = 2 / (p - 1)
    ref = integrate_euclidean(n, p, 1.0, s_max, tol=1e-12)
    t = integrate(Params(n, p, lam ** q), s_max / lam, tol=1e-12)
    s = np.linspace(0, s_max, 400)
    v_lam = lam ** -q * t.evaluate(s / lam)[0]
    return float(np.max(np.abs(v_lam - ref.evaluate(s)[0])))


def test_euclidean_limit_of_rescaled_solutions():
    e2, e3 = _blowup_error(1e2), _blowup_error(1e3)
    assert e3 < e2 / 5


def test_rescale_curvature():
    assert rescale_curvature(Params(3, 2, 1.7)) == Params(3, 2, 1.7)
    assert rescale_curvature(Params(3, 2, 4.0, c=2.0)) == Params(3, 2, 1.0)
    # amplitude of the ground state scales like c^(2/(p-1)): 24 at c=2 maps to 6
    assert rescale_curvature(Params(3, 2, 24.0, c=2.0)).alpha == 6.0
    with pytest.raises(UnsupportedRegimeError):
        rescale_curvature(Params(3, 1, 1.0, c=2.0))


@pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
def test_curvature_pullback_matches_direct_solve(c):
    p = 2.0
    params = Params(3, p, 1.3, c=c)
    unit = integrate(rescale_curvature(params), 5.0)
    direct = integrate(params, 5.0 / c)
    x = np.linspace(0, 5.0, 201)
    rc, uc, vc = pullback(x, *unit.evaluate(x), c=c, p=p)
    ud, vd = direct.evaluate(rc)
    np.testing.assert_allclose(ud, uc, atol=1e-7 * c ** 2)
    np.testing.assert_allclose(vd, vc, atol=1e-7 * c ** 3)


def test_bad_tolerances_and_radius():
    with pytest.raises(DomainError):
        integrate(Params(3, 2, 1.0), 10.0, tol=1e-2)
    with pytest.raises(DomainError):
        integrate(Params(3, 2, 1.0), 10.0, tol=1e-15)
    with pytest.raises(DomainError):
        integrate(Params(3, 2, 1.0), 0.0)


def test_step_budget_termination():
    t = integrate(Params(3, 0.5, 1.0), 60.0, max_steps=2000)
    assert t.termination is Termination.MAX_STEPS
    assert t.r_end < 60.0


def test_blowup_is_reported_not_raised():
    # focusing sign flipped: u'' ~ u^2 runs away
    t = solve(Equation(3, 2, weight=-1.0), Params(3, 2, 1.0), 50.0, 1e-8)
    assert t.termination is Termination.STEP_FAILURE
    assert np.all(np.isfinite(t.u))


def test_underflow_termination():
    t = linear_solve(11, 24.0, 400.0).trajectory
    assert t.termination is Termination.UNDERFLOW
    assert max(abs(t.u[-1]), abs(t.v[-1])) < 1e-270
