"""Shooting integrator for u'' + (n-1) coth(r) u' + |u|^(p-1) u = 0, u(0)=alpha, u'(0)=0.

A Dormand-Prince 5(4) pair with PI step control and Hairer's quartic dense
output drives the state (u, v = u') from a series start near the singular
origin. Sign changes of u (Zero events) and of v (CriticalPoint events) are
located on the interpolant inside every accepted step.

The scalar loop runs on Python floats; a 2-component state is far too small
for numpy to pay off per step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedRegimeError
from .geometry import Params

UNDERFLOW_FLOOR = 1e-280
COTH_SERIES_BELOW = 1e-8
DEFAULT_MAX_STEPS = 400_000


class Termination(str, enum.Enum):
    REACHED_RMAX = "ReachedRmax"
    UNDERFLOW = "Underflow"
    STEP_FAILURE = "StepFailure"
    MAX_STEPS = "MaxSteps"


class EventKind(str, enum.Enum):
    ZERO = "Zero"
    CRITICAL_POINT = "CriticalPoint"


@dataclass(frozen=True)
class State:
    r: float
    u: float
    v: float


@dataclass(frozen=True)
class Event:
    """A zero of u (value = u' there) or of u' (value = u there)."""

    kind: EventKind
    r: float
    value: float
    index: int


@dataclass(frozen=True)
class Equation:
    """u'' + (n-1) D(r) u' + weight |u|^(p-1) u = 0 with D = c coth(cr) or 1/r."""

    n: int
    p: float
    curvature: float = 1.0
    weight: float = 1.0
    euclidean: bool = False

    def damping(self, r: float) -> float:
        if self.euclidean:
            return 1.0 / r
        cr = self.curvature * r
        if cr < COTH_SERIES_BELOW:
            return 1.0 / r + self.curvature * cr / 3.0
        return self.curvature / math.tanh(cr)

    def force(self, u: float) -> float:
        p = self.p
        if p == 1.0:
            return self.weight * u
        if p == 2.0:
            return self.weight * u * abs(u)
        return self.weight * math.copysign(abs(u) ** p, u)

    def rhs(self, r: float, u: float, v: float) -> tuple[float, float]:
        if r == 0.0:
            return v, -self.force(u) / self.n
        return v, -(self.n - 1) * self.damping(r) * v - self.force(u)

    def series_start(self, alpha: float, r: float) -> tuple[float, float]:
        """u = alpha + a r^2 + b r^4 on the regular branch."""
        f0 = self.force(alpha)
        a = -f0 / (2 * self.n)
        fprime = self.weight * self.p * abs(alpha) ** (self.p - 1) if alpha != 0 else 0.0
        curv = 0.0 if self.euclidean else 2 * (self.n - 1) * self.curvature ** 2 / 3
        b = -a * (curv + fprime) / (4 * (self.n + 2))
        r2 = r * r
        return alpha + a * r2 + b * r2 * r2, 2 * a * r + 4 * b * r2 * r


def rhs(n: int, p: float, state: State, c: float = 1.0) -> tuple[float, float]:
    """Right-hand side of the first-order system at a state."""
    if state.r < 0:
        raise DomainError("radius must be non-negative")
    return Equation(n, p, curvature=c).rhs(state.r, state.u, state.v)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps, dense output between them, and detected events.

    ``dense`` holds, per step k (from r[k] to r[k+1]), the five Hairer
    coefficient pairs (u, v) of the quartic interpolant.
    """

    params: Params
    equation: Equation
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    dense: np.ndarray
    events: tuple
    termination: Termination
    tol: float
    r_max: float
    n_rejected: int = 0
    label: str = field(default="")

    def __post_init__(self):
        for arr in (self.r, self.u, self.v, self.dense):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.r)

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @property
    def zeros(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.ZERO]

    @property
    def critical_points(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.CRITICAL_POINT]

    def states(self):
        return [State(float(a), float(b), float(c)) for a, b, c in zip(self.r, self.u, self.v)]

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.r[0]) or np.any(x > self.r[-1]):
            raise DomainError(f"evaluation outside [0, {self.r_end}]")
        k = np.searchsorted(self.r, x, side="right") - 1
        k = np.clip(k, 0, len(self.r) - 2)
        h = self.r[k + 1] - self.r[k]
        theta = (x - self.r[k]) / h
        return k, h, theta

    def evaluate(self, x, derivative: bool = False):
        """Interpolated (u, v) at radii x; with derivative=True also dv/dr."""
        if len(self.r) < 2:
            raise DomainError("trajectory has a single sample")
        x = np.asarray(x, dtype=float)
        k, h, th = self._locate(x)
        c = self.dense[k]  # (..., 5, 2)
        t1 = 1.0 - th
        out = []
        for j in (0, 1):
            c1, c2, c3, c4, c5 = (c[..., i, j] for i in range(5))
            out.append(c1 + th * (c2 + t1 * (c3 + th * (c4 + t1 * c5))))
        if derivative:
            c1, c2, c3, c4, c5 = (c[..., i, 1] for i in range(5))
            # d/dtheta of c2 th + c3 th t1 + c4 th^2 t1 + c5 th^2 t1^2
            dth = (c2 + c3 * (1 - 2 * th) + c4 * (2 * th - 3 * th * th)
                   + c5 * (2 * th * t1 * t1 - 2 * th * th * t1))
            out.append(dth / h)
        if x.ndim == 0:
            return tuple(float(a) for a in out)
        return tuple(out)

    def with_label(self, label: str) -> "Trajectory":
        return Trajectory(self.params, self.equation, self.r, self.u, self.v, self.dense,
                          self.events, self.termination, self.tol, self.r_max,
                          self.n_rejected, label)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                 22 / 525, -1 / 40)
_D1, _D3, _D4, _D5, _D6, _D7 = (-12715105075 / 11282082432, 87487479700 / 32700410799,
                                 -10690763975 / 1880347072, 701980252875 / 199316789632,
                                 -1453857185 / 822651844, 69997945 / 29380423)

# PI controller exponents (Hairer & Wanner, dopri5)
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_SAFE = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 10.0

_SUBSAMPLES = (0.25, 0.5, 0.75, 1.0)


def _poly(c, th):
    c1, c2, c3, c4, c5 = c
    t1 = 1.0 - th
    return c1 + th * (c2 + t1 * (c3 + th * (c4 + t1 * c5)))


def _refine_root(c, h, r0, th_a, th_b, fa):
    """Bisection on the interpolant, then one secant step kept inside the bracket."""
    tol_th = 1e-12 * max(1.0, abs(r0) + h) / h
    fb = _poly(c, th_b)
    sa = fa >= 0.0
    for _ in range(200):
        if th_b - th_a <= tol_th:
            break
        mid = 0.5 * (th_a + th_b)
        fm = _poly(c, mid)
        if (fm >= 0.0) == sa:
            th_a, fa = mid, fm
        else:
            th_b, fb = mid, fm
    th = 0.5 * (th_a + th_b)
    if fb != fa:
        sec = th_a - fa * (th_b - th_a) / (fb - fa)
        if th_a <= sec <= th_b:
            th = sec
    return th


def _start_radius(eq: Equation, alpha: float, tol: float) -> float:
    r_start = max(1e-6, tol ** 0.25 * 1e-3)
    # keep the series start well inside the natural length scale of large data
    scale = abs(eq.force(alpha) / alpha) if alpha != 0 else 0.0
    if scale > 1.0:
        r_start = min(r_start, 1e-3 / math.sqrt(scale))
    return r_start


def _trivial(params, eq, r_max, tol) -> Trajectory:
    r = np.array([0.0, float(r_max)])
    z = np.zeros(2)
    dense = np.zeros((1, 5, 2))
    return Trajectory(params, eq, r, z.copy(), z.copy(), dense, (), Termination.REACHED_RMAX,
                      tol, float(r_max))


def solve(eq: Equation, params: Params, r_max: float, tol: float,
          max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Integrate ``eq`` from the origin with u(0) = params.alpha."""
    if not (1e-13 <= tol <= 1e-3):
        raise DomainError(f"tolerance must lie in [1e-13, 1e-3], got {tol!r}")
    if not r_max > 0:
        raise DomainError(f"r_max must be positive, got {r_max!r}")
    alpha = params.alpha
    if alpha == 0.0:
        return _trivial(params, eq, r_max, tol)

    rhs_ = eq.rhs
    blowup = 10.0 * abs(alpha) + 10.0
    r_start = min(_start_radius(eq, alpha, tol), 0.5 * r_max)
    u, v = eq.series_start(alpha, r_start)

    # segment [0, r_start]: cubic Hermite written in the quartic layout (c5 = 0)
    f0 = rhs_(0.0, alpha, 0.0)
    f1 = rhs_(r_start, u, v)
    dense = []
    for j, (y0, y1) in enumerate(((alpha, u), (0.0, v))):
        diff = y1 - y0
        c3 = r_start * f0[j] - diff
        c4 = diff - r_start * f1[j] - c3
        dense.append((y0, diff, c3, c4, 0.0))
    seg = [(dense[0][i], dense[1][i]) for i in range(5)]
    rs, us, vs, dens = [0.0, r_start], [alpha, u], [0.0, v], [seg]
    events = []

    r = r_start
    ku, kv = f1
    scale_len = math.sqrt(abs(alpha / eq.force(alpha))) if eq.force(alpha) != 0 else 1.0
    h = min(1e-2 * scale_len * tol ** 0.2 + r_start, r_max - r)
    err_old = 1e-4
    rejected_last = False
    n_rej = 0
    n_steps = 0
    sign_u = u >= 0.0
    sign_v = v >= 0.0
    termination = Termination.REACHED_RMAX
    n1 = eq.n - 1
    damping = eq.damping
    force = eq.force

    while r < r_max:
        if n_steps >= max_steps:
            termination = Termination.MAX_STEPS
            break
        last = False
        if r + h >= r_max:
            h = r_max - r
            last = True
        k1u, k1v = ku, kv
        r2 = r + _C2 * h
        y2u = u + h * _A21 * k1u
        y2v = v + h * _A21 * k1v
        k2u, k2v = y2v, -n1 * damping(r2) * y2v - force(y2u)
        r3 = r + _C3 * h
        y3u = u + h * (_A31 * k1u + _A32 * k2u)
        y3v = v + h * (_A31 * k1v + _A32 * k2v)
        k3u, k3v = y3v, -n1 * damping(r3) * y3v - force(y3u)
        r4 = r + _C4 * h
        y4u = u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
        y4v = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        k4u, k4v = y4v, -n1 * damping(r4) * y4v - force(y4u)
        r5 = r + _C5 * h
        y5u = u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
        y5v = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        k5u, k5v = y5v, -n1 * damping(r5) * y5v - force(y5u)
        r6 = r + h
        y6u = u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
        y6v = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        k6u, k6v = y6v, -n1 * damping(r6) * y6v - force(y6u)
        un = u + h * (_A71 * k1u + _A73 * k3u + _A74 * k4u + _A75 * k5u + _A76 * k6u)
        vn = v + h * (_A71 * k1v + _A73 * k3v + _A74 * k4v + _A75 * k5v + _A76 * k6v)
        k7u, k7v = vn, -n1 * damping(r6) * vn - force(un)
        eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
        sc = tol * max(abs(u), abs(v), abs(un), abs(vn))
        err = max(abs(eu), abs(ev)) / sc if sc > 0.0 else math.inf
        if not math.isfinite(err):
            err = math.inf

        if err > 1.0:
            n_rej += 1
            fac = 1.0 / _FAC_MIN if err == math.inf else min(1.0 / _FAC_MIN, err ** _EXPO / _SAFE)
            h = h / fac
            rejected_last = True
            if h < 1e-14 * max(1.0, r):
                termination = Termination.STEP_FAILURE
                break
            continue

        # accepted: dense output coefficients
        coeffs = []
        for y0, y1, k1, k3, k4, k5, k6, k7 in (
                (u, un, k1u, k3u, k4u, k5u, k6u, k7u),
                (v, vn, k1v, k3v, k4v, k5v, k6v, k7v)):
            diff = y1 - y0
            bspl = h * k1 - diff
            coeffs.append((y0, diff, bspl, diff - h * k7 - bspl,
                           h * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5 + _D6 * k6 + _D7 * k7)))
        cu, cv = coeffs

        # events: sign changes of u and v on the interpolant
        step_events = []
        for comp, c, sgn in ((EventKind.ZERO, cu, sign_u), (EventKind.CRITICAL_POINT, cv, sign_v)):
            th_prev, f_prev = 0.0, c[0]
            for th in _SUBSAMPLES:
                f = c[0] + c[1] if th == 1.0 else _poly(c, th)
                s = f >= 0.0
                if s != sgn:
                    th_root = _refine_root(c, h, r, th_prev, th, f_prev)
                    rr = r + th_root * h
                    if comp is EventKind.ZERO:
                        value = _poly(cv, th_root)
                    else:
                        value = _poly(cu, th_root)
                    step_events.append((rr, comp, value))
                    sgn = s
                th_prev, f_prev = th, f
            if comp is EventKind.ZERO:
                sign_u = sgn
            else:
                sign_v = sgn
        if step_events:
            step_events.sort(key=lambda t: t[0])
            for rr, comp, value in step_events:
                events.append(Event(comp, rr, value, len(events)))

        r = r_max if last else r + h
        u, v = un, vn
        ku, kv = k7u, k7v
        rs.append(r)
        us.append(u)
        vs.append(v)
        dens.append(tuple(zip(cu, cv)))
        n_steps += 1

        if not (math.isfinite(u) and math.isfinite(v)) or abs(u) > blowup:
            termination = Termination.STEP_FAILURE
            break
        if max(abs(u), abs(v)) < UNDERFLOW_FLOOR:
            termination = Termination.UNDERFLOW
            break

        fac = err ** _EXPO / err_old ** _BETA / _SAFE if err > 0 else 1.0 / _FAC_MAX
        fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac))
        h_new = h / fac
        if rejected_last:
            h_new = min(h_new, h)
        rejected_last = False
        err_old = max(err, 1e-4)
        h = h_new

    return Trajectory(params, eq, np.array(rs), np.array(us), np.array(vs),
                      np.array(dens, dtype=float).reshape(len(dens), 5, 2),
                      tuple(events), termination, tol, float(r_max), n_rej)


def integrate(params: Params, r_max: float, tol: float = 1e-10,
              max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Radial solution on H^n with curvature -c^2 (c = params.c)."""
    eq = Equation(params.n, params.p, curvature=params.c)
    return solve(eq, params, r_max, tol, max_steps)


def integrate_euclidean(n: int, p: float, alpha: float, r_max: float, tol: float = 1e-10,
                        linear_weight: float | None = None,
                        max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Flat-space profile v'' + (n-1)/s v' + |v|^(p-1) v = 0.

    With ``linear_weight`` set, solves the linear equation v'' + (n-1)/s v' + w v = 0
    instead (p is ignored).
    """
    if linear_weight is not None:
        eq = Equation(n, 1.0, weight=float(linear_weight), euclidean=True)
        params = Params(n, 1.0, alpha)
    else:
        eq = Equation(n, p, euclidean=True)
        params = Params(n, p, alpha)
    return solve(eq, params, r_max, tol, max_steps)


def rescale_curvature(params: Params) -> Params:
    """The c = 1 instance equivalent to ``params``: alpha -> alpha c^(-2/(p-1))."""
    if params.p == 1.0:
        raise UnsupportedRegimeError("curvature rescaling does not exist for p = 1")
    q = 2.0 / (params.p - 1.0)
    return Params(params.n, params.p, params.alpha * params.c ** (-q), 1.0)


def pullback(r, u, v, c: float, p: float):
    """Map samples of the c = 1 solution onto the curvature -c^2 solution."""
    q = 2.0 / (p - 1.0)
    r = np.asarray(r, dtype=float)
    return r / c, np.asarray(u) * c ** q, np.asarray(v) * c ** ((p + 1) / (p - 1))
