"""Functionals evaluated along trajectories and asymptotic decay fits.

F = u'^2/2 + |u|^(p+1)/(p+1) is nonincreasing along every radial solution.
Psi = phi_n F + sinh^(n-1) u u'/(p+1) satisfies Psi' = u'^2 psi_p, so its
monotonicity follows the sign of psi_p. Both are checked on samples here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DomainError, InsufficientDataError
from .geometry import log_sinh, phi_ratio, psi_p_bracket, sinh_power, phi_n
from .ode import State, Trajectory

POLY_MIN_R = 10.0
UNDETERMINED_RESIDUAL = 0.1
ZERO_EXCLUSION_STEPS = 4
EVENT_EXCLUSION_STEPS = 1.5


class DecayLaw(str, enum.Enum):
    POLYNOMIAL_SLOW = "PolynomialSlow"
    EXPONENTIAL_FAST = "ExponentialFast"
    SUBLINEAR_ENVELOPE = "SublinearEnvelope"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class DecayEstimate:
    law: DecayLaw
    fitted_rate: float
    fitted_constant: float
    window: tuple
    residual: float
    hypothesis: DecayLaw | None = None

    def to_dict(self):
        d = asdict(self)
        d["law"] = self.law.value
        d["hypothesis"] = self.hypothesis.value if self.hypothesis else None
        d["window"] = list(self.window)
        return d

    @classmethod
    def undetermined(cls, hypothesis=None):
        nan = float("nan")
        return cls(DecayLaw.UNDETERMINED, nan, nan, (nan, nan), nan, hypothesis)


def _unpack(state):
    if isinstance(state, State):
        return state.r, state.u, state.v
    if isinstance(state, Trajectory):
        return state.r, state.u, state.v
    r, u, v = state
    return np.asarray(r, float), np.asarray(u, float), np.asarray(v, float)


def lyapunov_F(p: float, state):
    """u'^2/2 + |u|^(p+1)/(p+1) for a State, a Trajectory, or (r, u, v) arrays."""
    _, u, v = _unpack(state)
    return 0.5 * v * v + abs(u) ** (p + 1) / (p + 1)


def pohozaev_Psi_scaled(n: int, p: float, state):
    """Psi / (sinh r)^(n-1); finite for all r, same sign as Psi."""
    r, u, v = _unpack(state)
    F = 0.5 * np.square(v) + np.abs(u) ** (p + 1) / (p + 1)
    out = np.asarray(phi_ratio(n, r)) * F + np.asarray(u) * np.asarray(v) / (p + 1)
    out = np.where(np.asarray(r) == 0, 0.0, out)
    return out if out.ndim else float(out)


def pohozaev_Psi(n: int, p: float, state):
    """phi_n(r) F + (sinh r)^(n-1) u u'/(p+1); exactly 0 at r = 0."""
    r, u, v = _unpack(state)
    F = 0.5 * np.square(v) + np.abs(u) ** (p + 1) / (p + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(phi_n(n, r)) * F + np.asarray(sinh_power(n, r)) * np.asarray(u) \
            * np.asarray(v) / (p + 1)
    out = np.where(np.asarray(r) == 0, 0.0, out)
    return out if out.ndim else float(out)


def f_monotone(traj: Trajectory, rtol: float = 1e-10) -> bool:
    F = lyapunov_F(traj.params.p, traj)
    return bool(np.all(np.diff(F) <= rtol * F[0]))


def weighted_F_monotone(traj: Trajectory, atol: float = 1e-6) -> bool:
    """(sinh r)^(2(n-1)) F nondecreasing, compared in log space from the first step on.

    The increase vanishes at zeros of u, where only the noise in F is left;
    ``atol`` bounds the tolerated decrease of the logarithm.
    """
    n, p = traj.params.n, traj.params.p
    r = traj.r[1:]
    F = lyapunov_F(p, (r, traj.u[1:], traj.v[1:]))
    if np.any(F <= 0):
        return False
    g = 2 * (n - 1) * np.asarray(log_sinh(r)) + np.log(F)
    return bool(np.all(np.diff(g) >= -atol))


@dataclass(frozen=True)
class PsiIdentityReport:
    max_rel_err: float
    r_at_max: float
    n_checked: int
    # the arrays hold checked midpoints only
    midpoints: np.ndarray
    fd_derivative: np.ndarray
    identity_derivative: np.ndarray

    def sign_flip(self):
        """Radii between which the finite-difference Psi' turns from > 0 to < 0, if any."""
        s = np.sign(self.fd_derivative)
        idx = np.where((s[:-1] > 0) & (s[1:] < 0))[0]
        if len(idx) == 0:
            return None
        i = idx[-1]
        return float(self.midpoints[i]), float(self.midpoints[i + 1])


def _distance_to(x, points):
    z = np.sort(np.asarray(points, float))
    j = np.searchsorted(z, x)
    left = z[np.clip(j - 1, 0, len(z) - 1)]
    right = z[np.clip(j, 0, len(z) - 1)]
    return np.minimum(np.abs(x - left), np.abs(x - right))


def psi_derivative_check(traj: Trajectory, min_samples: int = 100,
                         rel_step: float = 1e-4, snr: float = 1e3) -> PsiIdentityReport:
    """Compare a central difference of Psi at step midpoints with u'^2 psi_p.

    Both sides are divided by (sinh m)^(n-1) at the midpoint m so the check
    stays finite at large radii; this does not change the relative error.
    Midpoints within a step and a half of an event are skipped: there u' -> 0
    makes the relative error ill-conditioned, and for p < 1 the force has a
    kink at u = 0. Points where the identity value is within ``snr`` of the
    interpolation noise of
    the finite difference (dense-output error ~ tol |y| / h, propagated
    through dPsi/du and dPsi/dv) are skipped as well; near the origin the two
    leading terms of Psi cancel and the check carries no information there.
    """
    if len(traj) < min_samples:
        raise InsufficientDataError(f"need >= {min_samples} samples, got {len(traj)}")
    n, p = traj.params.n, traj.params.p
    r = traj.r
    mid = 0.5 * (r[1:-1] + r[2:])  # skip the series segment
    h = np.diff(r)[1:]
    delta = rel_step * h
    lo, hi = mid - delta, mid + delta
    ulo, vlo = traj.evaluate(lo)
    uhi, vhi = traj.evaluate(hi)
    um, vm = traj.evaluate(mid)
    base = np.asarray(log_sinh(mid)) * (n - 1)
    rho = np.asarray(phi_ratio(n, mid))

    def scaled_psi(x, u, v):
        # Psi(x) / sinh(mid)^(n-1)
        F = 0.5 * v * v + np.abs(u) ** (p + 1) / (p + 1)
        w = np.exp((n - 1) * np.asarray(log_sinh(x)) - base)
        return w * (np.asarray(phi_ratio(n, x)) * F + u * v / (p + 1))

    fd = (scaled_psi(hi, uhi, vhi) - scaled_psi(lo, ulo, vlo)) / (hi - lo)
    exact = vm * vm * np.asarray(psi_p_bracket(n, p, mid))

    au, av = np.abs(um), np.abs(vm)
    sensitivity = rho * au ** p + av / (p + 1) + rho * av + au / (p + 1)
    noise = traj.tol * np.maximum(au, av) / h * sensitivity
    mask = np.abs(exact) > snr * noise
    if traj.events:
        mask &= _distance_to(mid, [e.r for e in traj.events]) > EVENT_EXCLUSION_STEPS * h
    if p < 1 and traj.zeros:
        # u''' is unbounded at a zero and the interpolation error decays only like
        # (h/d)^3.5 with the distance d, so a few neighbouring steps are dropped too
        mask &= _distance_to(mid, [e.r for e in traj.zeros]) > ZERO_EXCLUSION_STEPS * h
    mid, fd, exact = mid[mask], fd[mask], exact[mask]
    if not mask.any():
        return PsiIdentityReport(0.0, float("nan"), 0, mid, fd, exact)
    rel = np.abs(fd - exact) / np.abs(exact)
    j = int(np.argmax(rel))
    return PsiIdentityReport(float(rel[j]), float(mid[j]), int(mask.sum()), mid, fd, exact)


def psi_sign(traj: Trajectory) -> str:
    """'negative', 'positive', 'zero' or 'mixed' over samples with r > 0."""
    s = pohozaev_Psi_scaled(traj.params.n, traj.params.p, traj)[1:]
    if np.all(s == 0):
        return "zero"
    if np.all(s < 0):
        return "negative"
    if np.all(s > 0):
        return "positive"
    return "mixed"


class ThetaVariant(str, enum.Enum):
    THETA = "Theta"
    THETA_P = "ThetaP"


def theta_series(traj: Trajectory, variant=ThetaVariant.THETA, window=None):
    """u'/u or u'/(|u|^(p-1) u) on accepted samples of one sign interval.

    Without a window the last sign interval (after the final zero) is used.
    """
    variant = ThetaVariant(variant)
    zeros = [e.r for e in traj.zeros]
    if window is None:
        lo = zeros[-1] if zeros else 0.0
        hi = traj.r_end
        mask = (traj.r > lo) & (traj.r <= hi)
    else:
        lo, hi = window
        if any(lo <= z <= hi for z in zeros):
            raise DomainError(f"window [{lo}, {hi}] contains a zero of u")
        mask = (traj.r >= lo) & (traj.r <= hi)
    r, u, v = traj.r[mask], traj.u[mask], traj.v[mask]
    if np.any(u == 0):
        raise DomainError("u vanishes on the requested window")
    if variant is ThetaVariant.THETA:
        return r, v / u
    p = traj.params.p
    return r, v / (np.abs(u) ** (p - 1) * u)


def _ols(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


def default_window(traj: Trajectory, law=None):
    r_hi = traj.r_end
    r_lo = max(0.5 * r_hi, POLY_MIN_R)
    if law is not None and DecayLaw(law) is not DecayLaw.SUBLINEAR_ENVELOPE:
        zeros = traj.zeros
        if zeros and zeros[-1].r >= r_lo:
            r_lo = zeros[-1].r + 0.5 * (r_hi - zeros[-1].r)
    return r_lo, r_hi


def decay_fit(traj: Trajectory, law, window=None, n_grid: int = 256,
              min_events: int = 5) -> DecayEstimate:
    """Least-squares fit of one asymptotic law on a window of the trajectory.

    PolynomialSlow: log|u| against log r; the reported constant assumes the
    exact rate 1/(p-1), i.e. it is the geometric mean of r^(1/(p-1)) |u|,
    signed like u. ExponentialFast: log|u| against r. SublinearEnvelope:
    log|u| at critical points against their radii.
    """
    law = DecayLaw(law)
    if law is DecayLaw.UNDETERMINED:
        raise DomainError("Undetermined is an outcome, not a hypothesis")
    p = traj.params.p
    r_lo, r_hi = window if window is not None else default_window(traj, law)
    if not (r_hi > r_lo >= 0) or r_hi > traj.r_end or r_lo < traj.r[0]:
        raise InsufficientDataError(f"fit window [{r_lo}, {r_hi}] is empty or outside "
                                    f"[0, {traj.r_end}]")

    if law is DecayLaw.SUBLINEAR_ENVELOPE:
        cps = [e for e in traj.critical_points if r_lo <= e.r <= r_hi and e.value != 0]
        if len(cps) < min_events:
            raise InsufficientDataError(f"{len(cps)} critical points in window, "
                                        f"need {min_events}")
        x = np.array([e.r for e in cps])
        y = np.log(np.abs([e.value for e in cps]))
        slope, icpt, res = _ols(x, y)
        est = DecayEstimate(law, -slope, math.exp(icpt), (r_lo, r_hi), res, law)
    else:
        if law is DecayLaw.POLYNOMIAL_SLOW:
            if p <= 1:
                raise DomainError("polynomial decay law needs p > 1")
            grid = np.geomspace(max(r_lo, 1e-12), r_hi, n_grid)
        else:
            grid = np.linspace(r_lo, r_hi, n_grid)
        u, _ = traj.evaluate(grid)
        est = fit_samples(grid, u, law, p, (float(r_lo), float(r_hi)))
    return _screen(est)


def _screen(est: DecayEstimate) -> DecayEstimate:
    if not est.residual <= UNDETERMINED_RESIDUAL:
        return DecayEstimate(DecayLaw.UNDETERMINED, est.fitted_rate, est.fitted_constant,
                             est.window, est.residual, est.hypothesis)
    return est


def fit_samples(r, u, law, p: float, window=None) -> DecayEstimate:
    """PolynomialSlow or ExponentialFast fit on given samples of one sign.

    Unlike decay_fit this takes raw arrays, so it also serves closed forms.
    """
    law = DecayLaw(law)
    if law not in (DecayLaw.POLYNOMIAL_SLOW, DecayLaw.EXPONENTIAL_FAST):
        raise DomainError(f"{law.value} is not a pointwise decay law")
    r = np.asarray(r, float)
    u = np.asarray(u, float)
    if np.any(u == 0) or np.any(np.sign(u) != np.sign(u[0])):
        raise InsufficientDataError("u changes sign inside the fit window")
    if window is None:
        window = (float(r[0]), float(r[-1]))
    sign = float(np.sign(u[0]))
    y = np.log(np.abs(u))
    if law is DecayLaw.POLYNOMIAL_SLOW:
        x = np.log(r)
        slope, _, res = _ols(x, y)
        const = sign * math.exp(float(np.mean(y + x / (p - 1))))
    else:
        slope, icpt, res = _ols(r, y)
        const = sign * math.exp(icpt)
    return _screen(DecayEstimate(law, -slope, const, tuple(window), res, law))


def diagnostics_report(traj: Trajectory, law=None) -> dict:
    """JSON-ready summary: F monotonicity, Psi sign, Psi identity error, decay fit."""
    try:
        identity = psi_derivative_check(traj).max_rel_err
    except InsufficientDataError:
        identity = float("nan")
    decay = DecayEstimate.undetermined()
    if law is not None:
        try:
            decay = decay_fit(traj, law)
        except (InsufficientDataError, DomainError):
            decay = DecayEstimate.undetermined(DecayLaw(law))
    return {
        "F_monotone": f_monotone(traj),
        "Psi_sign": psi_sign(traj),
        "Psi_identity_max_err": identity,
        "decay": decay.to_dict(),
    }
