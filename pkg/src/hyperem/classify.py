"""Solution-level classification by shooting from r = 0.

Zero counts, intersection counts between two profiles, the separatrix
amplitude U(0) by bisection on alpha, the first-zero map and zero-count
thresholds.

The separatrix discriminator declares "Below" from a Riccati certificate.
Theta = u'/u satisfies

    Theta' = -Theta^2 - (n-1) c coth(cr) Theta - |u|^(p-1).

For p > 1 the energy F bounds |u|^(p-1) from above by eps for all later r.
With lam2(eps) the larger root of x^2 - (n-1) c x + eps, Theta > -lam2 is
then forward invariant, so Theta cannot reach -inf and u has no further
zero. The plateau rule r^(1/(p-1)) u ~ c(n,p) is kept as a second test.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DecayEstimate, DecayLaw, decay_fit, lyapunov_F
from .errors import (DegenerateComparisonError, DomainError, InsufficientDataError,
                     UnsupportedRegimeError)
from .exact import ClosedForm, LinearClass, linear_class
from .geometry import (Params, Regime, RegimeTag, c_np, classify_regime, lambda_pair,
                       spectral_gap)
from .ode import Event, Termination, Trajectory, integrate

R_MAX_SCHEDULE = (40.0, 80.0, 160.0, 320.0, 640.0)
MAX_BRACKET = 2.0 ** 60
PLATEAU_BAND = 0.2
PLATEAU_HOLD = 1.0
# certificate must clear the invariant boundary by this fraction of lam2
CERTIFICATE_MARGIN = 1e-3


class SignClass(str, enum.Enum):
    POSITIVE_FOREVER = "PositiveForever"
    NEGATIVE_FOREVER = "NegativeForever"
    SIGN_CHANGING = "SignChanging"
    OSCILLATORY_INFINITE = "OscillatoryInfinite"
    TRIVIAL = "Trivial"


class Side(str, enum.Enum):
    BELOW = "Below"
    ABOVE = "Above"
    AT_SEPARATRIX = "AtSeparatrix"
    NOT_APPLICABLE = "NotApplicable"


def _event_dict(e: Event) -> dict:
    return {"kind": e.kind.value, "r": e.r, "value": e.value, "index": e.index}


@dataclass(frozen=True)
class Report:
    params: Params
    regime: Regime
    sign_class: SignClass
    zero_count: int
    decay: DecayEstimate
    separatrix_side: Side
    zeros: tuple
    r_max_used: float
    tol_used: float
    termination: Termination
    r_end: float

    def __post_init__(self):
        if self.zero_count != len(self.zeros):
            raise ValueError("zero_count must equal the number of zeros")

    def to_dict(self) -> dict:
        return {
            "params": {"n": self.params.n, "p": self.params.p, "alpha": self.params.alpha,
                       "c": self.params.c},
            "regime": str(self.regime),
            "sign_class": self.sign_class.value,
            "zero_count": self.zero_count,
            "decay": self.decay.to_dict(),
            "separatrix_side": self.separatrix_side.value,
            "zeros": [_event_dict(e) for e in self.zeros],
            "r_max_used": self.r_max_used,
            "tol_used": self.tol_used,
            "termination": self.termination.value,
            "r_end": self.r_end,
        }


# ---------------------------------------------------------------------------
# zeros


def count_zeros(traj: Trajectory) -> tuple[int, list]:
    zeros = traj.zeros
    return len(zeros), zeros


@dataclass(frozen=True)
class ZeroCountCheck:
    count: int
    count_refined: int
    tol: float

    @property
    def stable(self) -> bool:
        return self.count == self.count_refined


def count_zeros_verified(params: Params, r_max: float, tol: float = 1e-10) -> ZeroCountCheck:
    """Zero count at tol and at tol/10."""
    k1, _ = count_zeros(integrate(params, r_max, tol))
    k2, _ = count_zeros(integrate(params, r_max, tol / 10))
    return ZeroCountCheck(k1, k2, tol)


def riccati_certificate(traj: Trajectory, start: float = 0.0):
    """First accepted sample r >= start from which no further zero can occur.

    Returns None when the certificate never holds (or p <= 1, where the
    energy bound on |u|^(p-1) goes the wrong way).
    """
    p = traj.params.p
    if p <= 1:
        return None
    eq = traj.equation
    if eq.euclidean:
        return None
    c = eq.curvature
    damp = (traj.params.n - 1) * c
    F = lyapunov_F(p, traj)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = eq.weight * ((p + 1) * F) ** ((p - 1) / (p + 1))
        disc = damp * damp - 4 * eps
        lam2 = 0.5 * (damp + np.sqrt(np.maximum(disc, 0.0)))
        theta = traj.v / traj.u
        ok = ((traj.r >= start) & (traj.r > 0) & (traj.u != 0) & (disc > 0)
              & (theta > -lam2 * (1 - CERTIFICATE_MARGIN)))
    idx = np.flatnonzero(ok)
    if len(idx) == 0:
        return None
    return float(traj.r[idx[0]])


def plateau_onset(traj: Trajectory, band: float = PLATEAU_BAND, hold: float = PLATEAU_HOLD):
    """Start of the first stretch of length ``hold`` with r^(1/(p-1)) u within band of c(n,p)."""
    n, p = traj.params.n, traj.params.p
    if p <= 1:
        return None
    target = c_np(n, p) * math.copysign(1.0, traj.params.alpha)
    with np.errstate(over="ignore"):
        scaled = traj.r ** (1.0 / (p - 1)) * traj.u
    inside = np.abs(scaled - target) <= band * abs(target)
    onset = None
    for r, flag in zip(traj.r, inside):
        if not flag:
            onset = None
            continue
        if onset is None:
            onset = r
        if r - onset >= hold:
            return float(onset)
    return None


@dataclass(frozen=True)
class TailCheck:
    anchor: str | None  # "CriticalPoint", "EnergyCertificate" or None
    r_anchor: float
    eps: float
    zeros_after: int
    lam1: float
    g_min: float
    g_end: float
    bounded_below: bool


def ultimate_zero_check(traj: Trajectory) -> TailCheck:
    """No zero after an anchor radius r2, and log|u| + lam1 r bounded below past it.

    The anchor is the first critical point with eps = |u|^(p-1) < (n-1)^2/4.
    When no critical point qualifies, the first sample past the last zero
    where the energy certificate holds is used, with eps taken from F there
    (equal to |u|^(p-1) at a critical point, so this only widens the test).
    """
    n, p = traj.params.n, traj.params.p
    gap = spectral_gap(n)
    nan = float("nan")
    cp = next((e for e in traj.critical_points if abs(e.value) ** (p - 1) < gap), None)
    if cp is not None:
        anchor, r2, eps = "CriticalPoint", cp.r, abs(cp.value) ** (p - 1)
    else:
        start = traj.zeros[-1].r if traj.zeros else 0.0
        r2 = riccati_certificate(traj, start)
        if r2 is None:
            return TailCheck(None, nan, nan, 0, nan, nan, nan, False)
        i = int(np.searchsorted(traj.r, r2))
        F = float(lyapunov_F(p, (traj.r[i], traj.u[i], traj.v[i])))
        anchor, eps = "EnergyCertificate", ((p + 1) * F) ** ((p - 1) / (p + 1))
    after = sum(1 for e in traj.zeros if e.r > r2)
    lam1, _ = lambda_pair(n, eps)
    mask = traj.r >= r2
    r, u = traj.r[mask], traj.u[mask]
    with np.errstate(divide="ignore"):
        g = np.log(np.abs(u)) + lam1 * r
    half = len(g) // 2
    first_min = float(np.min(g[: max(half, 1)]))
    bounded = bool(np.all(np.isfinite(g)) and np.min(g[half:]) >= first_min - 1e-6)
    return TailCheck(anchor, float(r2), float(eps), after, float(lam1), float(np.min(g)),
                     float(g[-1]), bounded)


# ---------------------------------------------------------------------------
# intersections


def _profile_u(obj, x):
    return np.asarray(obj.evaluate(x)[0], float)


def _profile_np(obj):
    if isinstance(obj, Trajectory):
        return obj.params.n, obj.params.p
    return obj.n, obj.p


def _bisect_crossing(fa, fb, a, b, d, iters=60):
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = d(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if b - a <= 1e-13 * max(1.0, b):
            break
    return 0.5 * (a + b)


def intersections(a, b, r_range=None) -> list[float]:
    """Radii of transversal sign changes of u_a - u_b on the common range.

    Each of a, b is a Trajectory or a ClosedForm. Sign changes are detected on
    the merged sample grid and refined by bisection on the dense output.
    """
    if _profile_np(a) != _profile_np(b):
        raise DomainError("profiles must share n and p")
    if isinstance(a, Trajectory) and isinstance(b, Trajectory):
        if (a.params == b.params and a.equation == b.equation):
            raise DegenerateComparisonError("identical initial data")
    if isinstance(a, ClosedForm) and isinstance(b, ClosedForm) and a == b:
        raise DegenerateComparisonError("identical closed forms")
    grids = [t.r for t in (a, b) if isinstance(t, Trajectory)]
    hi = min((float(g[-1]) for g in grids), default=10.0)
    lo = 0.0
    if r_range is not None:
        lo, hi = max(lo, r_range[0]), min(hi, r_range[1])
    if not hi > lo:
        raise DomainError("profiles do not overlap")
    if grids:
        grid = np.unique(np.concatenate([g[(g >= lo) & (g <= hi)] for g in grids] + [[lo, hi]]))
        # midpoints guard against two crossings inside one step
        grid = np.unique(np.concatenate([grid, 0.5 * (grid[1:] + grid[:-1])]))
    else:
        grid = np.linspace(lo, hi, 4001)

    def d(x):
        return float(_profile_u(a, x) - _profile_u(b, x))

    diff = _profile_u(a, grid) - _profile_u(b, grid)
    if not np.any(diff):
        raise DegenerateComparisonError("profiles coincide on the whole range")
    out = []
    prev_i = None
    for i, val in enumerate(diff):
        if val == 0:
            continue
        if prev_i is not None and (val > 0) != (diff[prev_i] > 0):
            out.append(_bisect_crossing(diff[prev_i], val, grid[prev_i], grid[i], d))
        prev_i = i
    return out


def count_intersections(a, b, r_range=None) -> int:
    return len(intersections(a, b, r_range))


# ---------------------------------------------------------------------------
# single-solution classification


def _best_decay(traj: Trajectory, hypothesis: DecayLaw, allow_fast: bool) -> DecayEstimate:
    candidates = []
    for law in ([hypothesis, DecayLaw.EXPONENTIAL_FAST] if allow_fast else [hypothesis]):
        try:
            candidates.append(decay_fit(traj, law))
        except (InsufficientDataError, DomainError):
            continue
    if not candidates:
        return DecayEstimate.undetermined(hypothesis)
    determined = [c for c in candidates if c.law is not DecayLaw.UNDETERMINED]
    if not determined:
        return candidates[0]
    return min(determined, key=lambda c: c.residual)


def _is_fast(est: DecayEstimate, n: int, c: float) -> bool:
    return (est.law is DecayLaw.EXPONENTIAL_FAST
            and abs(est.fitted_rate - (n - 1) * c) <= 0.1 * (n - 1) * c)


def classify_trajectory(traj: Trajectory) -> Report:
    params = traj.params
    n, p = params.n, params.p
    regime = classify_regime(n, p)
    k, zeros = count_zeros(traj)
    side = Side.NOT_APPLICABLE
    if params.alpha == 0:
        sign = SignClass.TRIVIAL
        decay = DecayEstimate.undetermined()
    elif regime.tag is RegimeTag.SUBLINEAR:
        sign = SignClass.OSCILLATORY_INFINITE
        decay = _best_decay(traj, DecayLaw.SUBLINEAR_ENVELOPE, allow_fast=False)
    elif regime.tag is RegimeTag.LINEAR:
        lc = linear_class(n, params.c ** -2)
        if lc is LinearClass.OSCILLATORY_INFINITE:
            sign = SignClass.OSCILLATORY_INFINITE
        elif k:
            sign = SignClass.SIGN_CHANGING
        else:
            sign = SignClass.POSITIVE_FOREVER if params.alpha > 0 else SignClass.NEGATIVE_FOREVER
        decay = _best_decay(traj, DecayLaw.EXPONENTIAL_FAST, allow_fast=False)
    else:
        if k:
            sign = SignClass.SIGN_CHANGING
        else:
            sign = SignClass.POSITIVE_FOREVER if params.alpha > 0 else SignClass.NEGATIVE_FOREVER
        allow_fast = regime.tag is RegimeTag.SUBCRITICAL
        decay = _best_decay(traj, DecayLaw.POLYNOMIAL_SLOW, allow_fast)
        if regime.tag is RegimeTag.SUBCRITICAL:
            if k:
                side = Side.ABOVE
            elif _is_fast(decay, n, params.c):
                side = Side.AT_SEPARATRIX
            else:
                side = Side.BELOW
    return Report(params, regime, sign, k, decay, side, tuple(zeros), traj.r_max,
                  traj.tol, traj.termination, traj.r_end)


def classify_solution(params: Params, r_max: float = 50.0, tol: float = 1e-10) -> Report:
    return classify_trajectory(integrate(params, r_max, tol))


# ---------------------------------------------------------------------------
# separatrix


def _require_subcritical(n, p):
    regime = classify_regime(n, p)
    if regime.tag is not RegimeTag.SUBCRITICAL:
        raise UnsupportedRegimeError(f"separatrix search needs a subcritical pair, got {regime}")


@dataclass(frozen=True)
class Probe:
    alpha: float
    side: Side
    r_max: float
    r_decided: float


def probe_side(n: int, p: float, alpha: float, tol: float = 1e-10,
               schedule=R_MAX_SCHEDULE) -> Probe:
    """Above if u_alpha vanishes, Below if it provably never will; R_max grows until decided."""
    params = Params(n, p, alpha)
    for r_max in schedule:
        traj = integrate(params, r_max, tol)
        if traj.zeros:
            return Probe(alpha, Side.ABOVE, r_max, traj.zeros[0].r)
        cert = riccati_certificate(traj)
        if cert is not None:
            return Probe(alpha, Side.BELOW, r_max, cert)
        onset = plateau_onset(traj)
        if onset is not None:
            return Probe(alpha, Side.BELOW, r_max, onset)
        if traj.termination is not Termination.REACHED_RMAX:
            break
    return Probe(alpha, Side.AT_SEPARATRIX, schedule[-1], float("nan"))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    lo: float
    hi: float
    alpha: float
    decision: str


@dataclass(frozen=True)
class SeparatrixResult:
    alpha_star: float
    lo: float
    hi: float
    probes: int
    converged: bool
    trace: tuple = field(default_factory=tuple)

    def __float__(self):
        return self.alpha_star


def find_separatrix(n: int, p: float, bracket=(1.0, 2.0), tol_alpha: float = 1e-3,
                    tol: float = 1e-10, max_probes: int = 60) -> SeparatrixResult:
    """Bisection on alpha between a globally positive and a sign-changing solution."""
    _require_subcritical(n, p)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise DomainError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    trace = []
    probes = 0

    def run(alpha):
        nonlocal probes
        probes += 1
        pr = probe_side(n, p, alpha, tol)
        trace.append(TraceRow(probes, lo, hi, alpha, pr.side.value))
        return pr.side

    side = run(lo)
    while side is not Side.BELOW:
        if side is Side.AT_SEPARATRIX:
            return SeparatrixResult(lo, lo, lo, probes, True, tuple(trace))
        hi, lo = lo, lo / 2
        if lo < 1.0 / MAX_BRACKET:
            raise UnsupportedRegimeError("no positive solution found above 2^-60")
        side = run(lo)
    side = run(hi)
    while side is not Side.ABOVE:
        if side is Side.AT_SEPARATRIX:
            return SeparatrixResult(hi, hi, hi, probes, True, tuple(trace))
        lo, hi = hi, hi * 2
        if hi > MAX_BRACKET:
            raise UnsupportedRegimeError("bracket expansion exceeded 2^60")
        side = run(hi)
    while hi - lo >= tol_alpha and probes < max_probes:
        mid = 0.5 * (lo + hi)
        side = run(mid)
        if side is Side.ABOVE:
            hi = mid
        elif side is Side.BELOW:
            lo = mid
        else:
            return SeparatrixResult(mid, lo, hi, probes, True, tuple(trace))
    return SeparatrixResult(0.5 * (lo + hi), lo, hi, probes, hi - lo < tol_alpha, tuple(trace))


# ---------------------------------------------------------------------------
# first-zero map and zero-count thresholds


@dataclass(frozen=True)
class FirstZeroRow:
    alpha: float
    r_alpha: float
    in_domain: bool


def first_zero(n: int, p: float, alpha: float, tol: float = 1e-10,
               schedule=R_MAX_SCHEDULE) -> float:
    """Location of the first zero of u_alpha, nan if none within the R_max schedule."""
    params = Params(n, p, alpha)
    for r_max in schedule:
        traj = integrate(params, r_max, tol)
        if traj.zeros:
            return traj.zeros[0].r
        if riccati_certificate(traj) is not None:
            break
    return float("nan")


def first_zero_map(n: int, p: float, alphas, tol: float = 1e-10) -> list[FirstZeroRow]:
    _require_subcritical(n, p)
    rows = []
    for a in sorted(float(x) for x in alphas):
        r = first_zero(n, p, a, tol)
        rows.append(FirstZeroRow(a, r, not math.isnan(r)))
    return rows


def final_zero_count(n: int, p: float, alpha: float, tol: float = 1e-10,
                     schedule=R_MAX_SCHEDULE) -> int:
    """Zero count once the tail certificate past the last zero holds."""
    params = Params(n, p, alpha)
    k = 0
    for r_max in schedule:
        traj = integrate(params, r_max, tol)
        k = len(traj.zeros)
        start = traj.zeros[-1].r if traj.zeros else 0.0
        if riccati_certificate(traj, start) is not None:
            return k
    return k


@dataclass(frozen=True)
class ThresholdResult:
    k: int
    alpha_k: float
    lo: float
    hi: float
    status: str  # "EXPLORATORY" or "AMBIGUOUS"
    scan: tuple
    probes: int


def zero_count_threshold(n: int, p: float, k: int, alpha_hi: float, alpha_lo: float = 1.0,
                         tol: float = 1e-10, tol_alpha: float = 1e-3, n_scan: int = 16,
                         max_probes: int = 60) -> ThresholdResult:
    """alpha_k = inf{alpha : u_alpha has at least k zeros}.

    Monotonicity of the count in alpha is only conjectured; a log-spaced
    scan of the bracket checks it first, and a non-monotone scan is reported
    as AMBIGUOUS without a value.
    """
    _require_subcritical(n, p)
    if k < 1:
        raise DomainError("k must be >= 1")
    if not 0 < alpha_lo < alpha_hi:
        raise DomainError("need 0 < alpha_lo < alpha_hi")
    scan_alphas = np.geomspace(alpha_lo, alpha_hi, n_scan)
    counts = [final_zero_count(n, p, float(a), tol) for a in scan_alphas]
    scan = tuple((float(a), int(c)) for a, c in zip(scan_alphas, counts))
    probes = len(scan)
    if counts[0] >= k or counts[-1] < k:
        raise DomainError(f"bracket [{alpha_lo}, {alpha_hi}] does not straddle {k} zeros "
                          f"(counts {counts[0]} .. {counts[-1]})")
    if any(b < a for a, b in zip(counts, counts[1:])):
        return ThresholdResult(k, float("nan"), alpha_lo, alpha_hi, "AMBIGUOUS", scan, probes)
    j = next(i for i, c in enumerate(counts) if c >= k)
    lo, hi = float(scan_alphas[j - 1]), float(scan_alphas[j])
    while hi - lo >= tol_alpha and probes < max_probes:
        mid = 0.5 * (lo + hi)
        probes += 1
        if final_zero_count(n, p, mid, tol) >= k:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(k, 0.5 * (lo + hi), lo, hi, "EXPLORATORY", scan, probes)
