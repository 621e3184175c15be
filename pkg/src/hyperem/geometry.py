"""Radial kernels of the hyperbolic Laplacian and the constants built from them.

The volume density of geodesic spheres in H^n is (sinh r)^(n-1). Everything
here is a closed-form function of r, n and p; no ODE solving happens in this
module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, SpectralGapError, UnsupportedRegimeError

# relative tolerance for recognising p == (n+2)/(n-2) typed as a decimal
CRITICAL_RTOL = 1e-12
_SERIES_TERMS = 30
_SERIES_CUTOFF = 1.0


@dataclass(frozen=True)
class Params:
    """One problem instance: dimension, exponent, curvature scale, u(0)."""

    n: int
    p: float
    alpha: float
    c: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (self.p > 0 and math.isfinite(self.p)):
            raise DomainError(f"exponent must be positive and finite, got {self.p!r}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"curvature scale must be positive, got {self.c!r}")
        if not math.isfinite(self.alpha):
            raise DomainError(f"initial value must be finite, got {self.alpha!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "c", float(self.c))

    def with_alpha(self, alpha: float) -> "Params":
        return Params(self.n, self.p, alpha, self.c)


class RegimeTag(str, enum.Enum):
    SUBLINEAR = "Sublinear"
    LINEAR = "Linear"
    SUBCRITICAL = "Subcritical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    critical_boundary: bool = False

    def __str__(self):
        if self.critical_boundary:
            return f"{self.tag.value}(critical)"
        return self.tag.value


def critical_exponent(n: int) -> float:
    """(n+2)/(n-2); infinite for n = 2."""
    if n == 2:
        return math.inf
    return (n + 2) / (n - 2)


def _check_np(n, p):
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not (p > 0 and math.isfinite(p)):
        raise DomainError(f"exponent must be positive and finite, got {p!r}")


def classify_regime(n: int, p: float) -> Regime:
    _check_np(n, p)
    if p < 1:
        return Regime(RegimeTag.SUBLINEAR)
    if p == 1:
        return Regime(RegimeTag.LINEAR)
    if n == 2:
        return Regime(RegimeTag.SUBCRITICAL)
    pc = critical_exponent(n)
    if abs(p - pc) <= CRITICAL_RTOL * pc:
        return Regime(RegimeTag.SUPERCRITICAL, critical_boundary=True)
    if p > pc:
        return Regime(RegimeTag.SUPERCRITICAL)
    return Regime(RegimeTag.SUBCRITICAL)


# ---------------------------------------------------------------------------
# phi_n(r) = int_0^r sinh(s)^(n-1) ds


@lru_cache(maxsize=None)
def _sinh_power_series(m: int) -> tuple:
    """Coefficients P_k of (sinh s / s)^m = sum_k P_k s^(2k).

    Power of a series by the J.C.P. Miller recurrence; sinh s / s has
    coefficients 1/(2j+1)!.
    """
    S = [1.0 / math.factorial(2 * j + 1) for j in range(_SERIES_TERMS)]
    P = [1.0]
    for k in range(1, _SERIES_TERMS):
        acc = 0.0
        for j in range(1, k + 1):
            acc += ((m + 1) * j - k) * S[j] * P[k - j]
        P.append(acc / k)
    return tuple(P)


def _phi_series(m: int, r: np.ndarray) -> np.ndarray:
    # int_0^r s^m (sinh s/s)^m ds, convergent for r < pi; used on r <= 1
    P = _sinh_power_series(m)
    x = r * r
    out = np.zeros_like(r)
    for k in reversed(range(len(P))):
        out = out * x + P[k] / (m + 2 * k + 1)
    return out * r ** (m + 1)


def _phi_ratio_recurrence(m: int, r: np.ndarray) -> np.ndarray:
    # J_m = I_m / sinh^m with I_m = sinh^(m-1) cosh / m - (m-1)/m I_(m-2)
    with np.errstate(over="ignore"):
        # sinh^2 overflows past r ~ 355; 1/inf = 0 is the correct limit
        inv_sh2 = 1.0 / np.square(np.sinh(r))
    coth = 1.0 / np.tanh(r)
    if m % 2 == 0:
        J = r.copy()
        start = 2
    else:
        J = np.tanh(0.5 * r)
        start = 3
    for k in range(start, m + 1, 2):
        J = coth / k - (k - 1) / k * J * inv_sh2
    return J


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("radius must be non-negative")
    return arr


def log_sinh(r):
    """log(sinh r) without overflow; -inf at r = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        big = r + np.log1p(-np.exp(-2.0 * np.maximum(r, 1e-300))) - math.log(2.0)
        small = np.log(np.sinh(np.minimum(r, 1.0)))
    out = np.where(r > 1.0, big, small)
    return out if out.ndim else float(out)


def sinh_power(n: int, r):
    """(sinh r)^(n-1), evaluated in log space for large r."""
    r = np.asarray(r, dtype=float)
    m = n - 1
    with np.errstate(over="ignore"):
        out = np.where(r > 1.0, np.exp(m * np.asarray(log_sinh(np.maximum(r, 1.0)))),
                       np.sinh(np.minimum(r, 1.0)) ** m)
    return out if out.ndim else float(out)


def phi_ratio(n: int, r):
    """phi_n(r) / (sinh r)^(n-1); tends to 1/(n-1) at infinity, 0 at r = 0."""
    arr = _as_array(r)
    m = n - 1
    flat = np.atleast_1d(arr).astype(float)
    out = np.zeros_like(flat)
    small = (flat > 0) & (flat <= _SERIES_CUTOFF)
    large = flat > _SERIES_CUTOFF
    if small.any():
        rs = flat[small]
        out[small] = _phi_series(m, rs) / np.sinh(rs) ** m
    if large.any():
        out[large] = _phi_ratio_recurrence(m, flat[large])
    out = out.reshape(arr.shape)
    return out if out.ndim else float(out)


def phi_n(n: int, r):
    """Volume of the geodesic ball of radius r, divided by the sphere area.

    Closed form via the sinh-power reduction recurrence for r > 1 and a
    convergent Taylor series below. Overflows to inf past r ~ 709/(n-1).
    """
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    arr = _as_array(r)
    flat = np.atleast_1d(arr).astype(float)
    out = np.zeros_like(flat)
    small = (flat > 0) & (flat <= _SERIES_CUTOFF)
    large = flat > _SERIES_CUTOFF
    if small.any():
        out[small] = _phi_series(n - 1, flat[small])
    if large.any():
        with np.errstate(over="ignore"):
            out[large] = _phi_ratio_recurrence(n - 1, flat[large]) * sinh_power(n, flat[large])
    out = out.reshape(arr.shape)
    return out if out.ndim else float(out)


def psi_p_bracket(n: int, p: float, r):
    """psi_p(r) / (sinh r)^(n-1); carries the sign of psi_p without overflow."""
    arr = _as_array(r)
    flat = np.atleast_1d(arr).astype(float)
    out = np.zeros_like(flat)
    pos = flat > 0
    if pos.any():
        rr = flat[pos]
        out[pos] = (p + 3) / (2 * (p + 1)) - (n - 1) * phi_ratio(n, rr) / np.tanh(rr)
    out = out.reshape(arr.shape)
    return out if out.ndim else float(out)


def psi_p(n: int, p: float, r):
    """Weight in Psi' = u'^2 psi_p; zero at r = 0."""
    _check_np(n, p)
    arr = _as_array(r)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(psi_p_bracket(n, p, arr)) * np.asarray(sinh_power(n, arr))
    out = np.where(arr == 0, 0.0, out)
    return out if out.ndim else float(out)


def find_R_np(n: int, p: float) -> float:
    """Unique positive root of psi_p in the subcritical range."""
    regime = classify_regime(n, p)
    if regime.tag is not RegimeTag.SUBCRITICAL:
        raise UnsupportedRegimeError(f"psi_p has no sign change for {regime} (n={n}, p={p})")

    def g(x):
        return psi_p_bracket(n, p, x)

    lo, hi = 0.5, 1.0
    while g(lo) <= 0:
        lo *= 0.5
        if lo < 1e-8:
            raise UnsupportedRegimeError("psi_p is not positive near the origin")
    hi = max(hi, lo)
    while g(hi) >= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise UnsupportedRegimeError("psi_p has no root below 1e6")
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def c_np(n: int, p: float) -> float:
    """Limit of r^(1/(p-1)) u(r) for slowly decaying solutions."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not p > 1:
        raise DomainError(f"c(n,p) needs p > 1, got {p!r}")
    return ((n - 1) / (p - 1)) ** (1.0 / (p - 1))


def spectral_gap(n: int) -> float:
    return (n - 1) ** 2 / 4


def lambda_pair(n: int, c: float) -> tuple[float, float]:
    """Roots of x^2 - (n-1)x + c = 0, smaller first."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not c > 0:
        raise DomainError(f"spectral parameter must be positive, got {c!r}")
    disc = (n - 1) ** 2 - 4 * c
    if disc < 0:
        raise SpectralGapError(f"c = {c} exceeds (n-1)^2/4 = {spectral_gap(n)}")
    root = math.sqrt(disc)
    lam2 = 0.5 * ((n - 1) + root)
    # product form avoids cancellation in the small root
    lam1 = c / lam2
    return lam1, lam2
