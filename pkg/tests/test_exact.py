import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperem.errors import DomainError, UnsupportedRegimeError
from hyperem.exact import (ClosedForm, Family, LinearClass, exact_ground_state, exponential_rate,
                           linear_class, linear_lower_bound, linear_lower_bound_check,
                           linear_mode, linear_solve, residual_check)
from hyperem.geometry import Params, lambda_pair
from hyperem.ode import integrate

FAMILIES = [(n, f) for n in (3, 4, 5, 7) for f in ("A", "B", "C")]
GRID = np.linspace(0.0, 10.0, 1001)


@pytest.mark.parametrize("n, family", FAMILIES)
def test_residual_analytic(n, family):
    U = exact_ground_state(n, family)
    # absolute for moderate amplitudes; U(0) grows like (n(n-1))^(n-1) in family A
    bound = 1e-9 * max(1.0, U.amplitude / 100)
    assert residual_check(U, n, U.p, GRID) < bound
    assert residual_check(U.negated(), n, U.p, GRID) < bound


def test_residual_grid_example():
    U = exact_ground_state(3, "B")
    assert residual_check(U, 3, 2, np.linspace(0.01, 10, 200)) < 1e-10


@pytest.mark.parametrize("n, family", FAMILIES)
def test_residual_central_differences(n, family):
    U = exact_ground_state(n, family)
    h = 1e-5
    r = np.linspace(0.05, 10.0, 400)
    u = U.evaluate(r)[0]
    plus, minus = U.evaluate(r + h), U.evaluate(r - h)
    # one central difference per derivative order; a second difference of U
    # itself at this h is dominated by roundoff eps |U| / h^2
    d1 = (plus[0] - minus[0]) / (2 * h)
    d2 = (plus[1] - minus[1]) / (2 * h)
    res = d2 + (n - 1) / np.tanh(r) * d1 + np.abs(u) ** (U.p - 1) * u
    bound = 1e-6 if n == 3 else 1e-6 * U.amplitude
    assert np.max(np.abs(res)) < bound


@pytest.mark.parametrize("n, family", FAMILIES)
def test_ground_state_shape(n, family):
    U = exact_ground_state(n, family)
    u, du, _ = U.evaluate(GRID)
    assert np.all(u > 0) and np.all(du <= 0)
    assert math.isfinite(U.amplitude)


def test_amplitudes():
    assert exact_ground_state(3, "B").amplitude == pytest.approx(6.0, rel=1e-14)
    assert exact_ground_state(3, "C").amplitude == pytest.approx(math.sqrt(1.5) * 4, rel=1e-14)
    assert exact_ground_state(3, "A").amplitude == pytest.approx(9.0, rel=1e-14)
    assert exact_ground_state(4, "B").amplitude == pytest.approx(12 ** 1.5, rel=1e-14)
    assert exact_ground_state(3, "A").p == 1.5
    assert exact_ground_state(3, "C").p == 3.0


def test_printed_family_A_constant_is_flagged():
    U = exact_ground_state(3, "A")
    assert not U.printed_constant_matches
    assert U.printed_constant == 18.0 ** 2
    bad = U.with_constant(U.printed_constant)
    assert residual_check(bad, 3, 1.5, [1.0]) > 1
    for fam in ("B", "C"):
        assert exact_ground_state(3, fam).printed_constant_matches


def test_verify_record():
    rec = exact_ground_state(3, "A").verify_record()
    assert list(rec) == ["family", "n", "p", "constant_used", "printed_constant_matches",
                         "max_residual"]
    assert rec["constant_used"] == 36.0 and rec["printed_constant_matches"] is False
    assert rec["max_residual"] < 1e-9


def test_zero_solution_residual():
    zero = exact_ground_state(3, "B").with_constant(0.0)
    assert residual_check(zero, 3, 2, GRID) == 0.0


def test_unsupported_and_bad_inputs():
    with pytest.raises(UnsupportedRegimeError):
        exact_ground_state(2, "B")
    with pytest.raises(ValueError):
        exact_ground_state(3, "D")
    with pytest.raises(DomainError):
        exact_ground_state(3, Family.LINEAR_MODE)
    with pytest.raises(DomainError):
        exact_ground_state(3, "B").evaluate(-1.0)


# (5, C) drifts to 2e-3 by r = 6: the unstable direction grows fastest there
@pytest.mark.parametrize("n, family", [(3, "A"), (3, "B"), (3, "C"), (4, "B"), (4, "C"),
                                       (5, "A"), (5, "B")])
def test_shooting_tracks_closed_form(n, family):
    U = exact_ground_state(n, family)
    t = integrate(Params(n, U.p, U.amplitude), 6.0, tol=1e-12)
    x = np.linspace(0, 6, 121)
    rel = np.abs(t.evaluate(x)[0] - U.evaluate(x)[0]) / U.evaluate(x)[0]
    assert np.max(rel) < 1e-3


@pytest.mark.parametrize("n, family", FAMILIES)
def test_exponential_rate(n, family):
    est = exponential_rate(exact_ground_state(n, family))
    assert est.fitted_rate == pytest.approx(n - 1, rel=0.01)


def test_trajectory_residual():
    t = integrate(Params(3, 2, 6.0), 5.0, tol=1e-12)
    assert residual_check(t, 3, 2, np.linspace(0, 5, 200)) < 1e-6


def test_linear_classes():
    assert linear_class(3, 0.5) is LinearClass.POSITIVE_SLOW_DECAY
    assert linear_class(3, 1) is LinearClass.POSITIVE_BORDERLINE
    assert linear_class(3, 1.0) is LinearClass.POSITIVE_BORDERLINE
    assert linear_class(3, 1 + 1e-15) is LinearClass.OSCILLATORY_INFINITE
    assert linear_class(4, 2.25) is LinearClass.POSITIVE_BORDERLINE


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_linear_mode_matches_solver(c):
    mode = linear_mode(3, c)
    t = linear_solve(3, c, 20.0, tol=1e-12).trajectory
    x = np.linspace(0, 20, 201)
    np.testing.assert_allclose(t.evaluate(x)[0], mode.evaluate(x)[0], atol=1e-9)
    assert residual_check(mode, 3, 1.0, x) < 1e-9


def test_linear_borderline_comparability():
    sol = linear_solve(3, 1.0, 40.0)
    t = sol.trajectory
    assert sol.classification is LinearClass.POSITIVE_BORDERLINE
    assert np.all(t.u > 0)
    mask = (t.r >= 5) & (t.r <= 40)
    ratio = t.u[mask] / ((1 + t.r[mask]) * np.exp(-t.r[mask]))
    assert 0 < ratio.min() <= ratio.max() < np.inf
    assert ratio.max() / ratio.min() < 2


def test_linear_slow_decay_two_sided_bounds():
    t = linear_solve(3, 0.5, 40.0).trajectory
    lam1, _ = lambda_pair(3, 0.5)
    assert np.all(t.u > 0)
    mask = t.r >= 1
    lower = t.u[mask] * np.exp(lam1 * t.r[mask])
    upper = t.u[mask] * np.exp((lam1 - 0.05) * t.r[mask])
    assert lower.min() > 0
    assert upper.max() < np.inf and np.all(np.diff(upper[t.r[mask] > 5]) < 0)


def test_linear_oscillation():
    sol = linear_solve(3, 2.0, 30.0)
    assert sol.classification is LinearClass.OSCILLATORY_INFINITE
    assert len(sol.trajectory.zeros) >= 5


def test_linear_theta_limit():
    t = linear_solve(3, 0.5, 60.0).trajectory
    u, v = t.evaluate(50.0)
    assert v / u == pytest.approx(-lambda_pair(3, 0.5)[0], abs=1e-3)


@settings(max_examples=15)
@given(st.floats(0.05, 0.99))
def test_linear_lower_bound_holds(c):
    t = linear_solve(3, c, 30.0).trajectory
    rep = linear_lower_bound_check(t, 3, c)
    assert rep.holds


def test_linear_lower_bound_equality_at_origin():
    for c in (0.1, 0.5, 0.9):
        assert linear_lower_bound(3, c, 0.0, 2.5) == pytest.approx(2.5, rel=1e-15)


def test_lower_bound_gap_shrinks_towards_gap():
    # absolute gap in the tail; relative to u it grows as c approaches 1
    gaps = []
    for c in (0.3, 0.5, 0.7, 0.9):
        t = linear_solve(3, c, 30.0).trajectory
        rep = linear_lower_bound_check(t, 3, c)
        assert rep.holds
        gaps.append(float(t.u[-1] - linear_lower_bound(3, c, t.r[-1])))
    assert all(a > b > 0 for a, b in zip(gaps, gaps[1:]))


def test_linear_lower_bound_rejects_large_c():
    t = linear_solve(3, 1.0, 5.0).trajectory
    with pytest.raises(UnsupportedRegimeError):
        linear_lower_bound_check(t, 3, 1.0)
    with pytest.raises(UnsupportedRegimeError):
        linear_mode(4, 0.5)
    with pytest.raises(DomainError):
        linear_solve(3, 0.0, 5.0)


def test_closed_form_is_immutable():
    U = exact_ground_state(3, "B")
    assert isinstance(U, ClosedForm)
    with pytest.raises(AttributeError):
        U.constant = 1.0
