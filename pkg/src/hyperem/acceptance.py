"""Acceptance checks, shared by the `verify` command and the test suite.

Each check returns a CriterionResult carrying the measured values. Value
checks decide ``passed``; the wall-clock budget is tracked separately so the
serialized record does not depend on machine load.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classify as cl
from .diagnostics import (DecayLaw, decay_fit, f_monotone, pohozaev_Psi, psi_derivative_check,
                          psi_sign, theta_series)
from .exact import (exact_ground_state, linear_lower_bound_check, linear_solve,
                    printed_constant, residual_check)
from .geometry import Params, c_np, find_R_np, lambda_pair
from .ode import integrate, integrate_euclidean, pullback, rescale_curvature

LINEAR_BORDERLINE_BAND = (0.5, 2.5)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    measured: dict
    budget_s: float
    elapsed_s: float = field(default=0.0)

    @property
    def within_budget(self) -> bool:
        return self.elapsed_s <= self.budget_s

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def record(self) -> dict:
        return {"criterion": self.cid, "name": self.name, "passed": self.passed,
                "measured": self.measured}

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        vals = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        budget = "" if self.within_budget else " OVER BUDGET"
        return (f"[{tag}] C{self.cid:<2d} {self.name}: {vals} "
                f"({self.elapsed_s:.2f} s / {self.budget_s:g} s{budget})")


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(str(_short(x)) for x in v) + "]"
    return v


def within(x, target, rel):
    return abs(x - target) <= rel * abs(target)


# ---------------------------------------------------------------------------


def c1_separatrix():
    res = cl.find_separatrix(3, 2)
    m = {"alpha_star": res.alpha_star, "probes": res.probes, "converged": res.converged}
    ok = abs(res.alpha_star - 6.0) <= 0.01 and res.probes <= 60 and res.converged
    return "separatrix U(0) for n=3, p=2", ok, m


def c2_closed_forms():
    grid = np.linspace(0.0, 10.0, 1001)
    worst = 0.0
    for n in (3, 4, 5):
        for fam in ("B", "C"):
            U = exact_ground_state(n, fam)
            worst = max(worst, residual_check(U, n, U.p, grid))
    a_res, a_printed_flagged, a_printed_res = 0.0, True, math.inf
    for n in (3, 4, 5):
        A = exact_ground_state(n, "A")
        a_res = max(a_res, residual_check(A, n, A.p, grid))
        a_printed_flagged &= not A.printed_constant_matches
        a_printed_res = min(a_printed_res, residual_check(
            A.with_constant(printed_constant(n, "A")), n, A.p, [1.0]))
    m = {"max_residual_BC": worst, "max_residual_A_corrected": a_res,
         "printed_A_flagged": a_printed_flagged, "min_printed_A_residual_at_1": a_printed_res}
    ok = worst < 1e-9 and a_res < 1e-9 and a_printed_flagged and a_printed_res > 1
    return "closed-form residuals", ok, m


def c3_supercritical():
    t = integrate(Params(3, 6, 1.0), 200.0)
    est = decay_fit(t, DecayLaw.POLYNOMIAL_SLOW)
    c = c_np(3, 6)
    checkpoints = (50.0, 100.0, 200.0)
    dev = [abs(r ** 0.2 * t.evaluate(r)[0] - c) for r in checkpoints]
    m = {"fitted_constant": est.fitted_constant, "c_np": c, "fitted_rate": est.fitted_rate,
         "deviation_at_50_100_200": dev, "zeros": len(t.zeros)}
    ok = (est.law is DecayLaw.POLYNOMIAL_SLOW and within(est.fitted_constant, c, 0.05)
          and within(est.fitted_rate, 0.2, 0.05) and dev[0] > dev[1] > dev[2]
          and not t.zeros)
    return "supercritical decay constant", ok, m


def c4_subcritical_slow():
    t = integrate(Params(3, 2, 1.0), 100.0)
    ru = 100.0 * t.evaluate(100.0)[0]
    k = cl.count_intersections(t, exact_ground_state(3, "B"))
    m = {"zeros": len(t.zeros), "r_u_at_100": ru, "intersections_with_U": k}
    ok = not t.zeros and within(ru, 2.0, 0.05) and k == 1
    return "subcritical slow decay below U(0)", ok, m


C5_R_MAX = 1e4


def c5_one_zero_band():
    t = integrate(Params(3, 2, 6.05), C5_R_MAX)
    est = decay_fit(t, DecayLaw.POLYNOMIAL_SLOW)
    m = {"zeros": len(t.zeros), "fitted_constant": est.fitted_constant,
         "window": list(est.window), "r_max": C5_R_MAX}
    ok = len(t.zeros) == 1 and within(est.fitted_constant, -2.0, 0.10)
    return "one-zero band and negative limit", ok, m


def c6_finite_zeros():
    rows = []
    ok = True
    for a in (10.0, 20.0, 50.0):
        chk = cl.count_zeros_verified(Params(3, 2, a), 60.0)
        tail = cl.ultimate_zero_check(integrate(Params(3, 2, a), 60.0))
        good = chk.stable and tail.anchor is not None and tail.zeros_after == 0 \
            and tail.bounded_below
        ok &= good
        rows.append([a, chk.count, chk.count_refined, tail.anchor, tail.r_anchor,
                     tail.g_min])
    return "finitely many zeros (subcritical)", ok, {"alpha_zeros_refined_anchor_r_gmin": rows}


def c7_sublinear():
    t = integrate(Params(3, 0.5, 1.0), 60.0)
    target = 2.0 / 1.5
    est = decay_fit(t, DecayLaw.SUBLINEAR_ENVELOPE)
    last = t.critical_points[-5:]
    g = [math.log(abs(e.value)) + target * e.r for e in last]
    earlier = [math.log(abs(e.value)) + target * e.r for e in t.critical_points[:-5]]
    bounded = bool(earlier) and min(g) >= min(earlier) - 1e-9
    m = {"zeros": len(t.zeros), "r_end": t.r_end, "termination": t.termination.value,
         "envelope_rate": est.fitted_rate, "target_rate": target,
         "min_g_last5": min(g), "lower_bound_holds": bounded}
    ok = (len(t.zeros) >= 10 and t.r_end >= 60.0 and within(est.fitted_rate, target, 0.10)
          and bounded)
    return "sublinear oscillation envelope", ok, m


C8_RUNS = {"supercritical": (Params(3, 6, 1.0), 50.0),
           "subcritical": (Params(3, 2, 1.0), 50.0),
           "sublinear": (Params(3, 0.5, 1.0), 10.0)}


def c8_functionals():
    m = {}
    ok = True
    for name, (params, r_max) in C8_RUNS.items():
        t = integrate(params, r_max)
        rep = psi_derivative_check(t)
        psi0 = pohozaev_Psi(params.n, params.p, (0.0, params.alpha, 0.0))
        sign = psi_sign(t)
        good = f_monotone(t) and psi0 == 0.0 and rep.max_rel_err < 1e-4
        if name == "supercritical":
            good &= sign == "negative"
        elif name == "subcritical":
            R = find_R_np(params.n, params.p)
            flip = rep.sign_flip()
            h = float(np.max(np.diff(t.r)[(t.r[:-1] > R - 1) & (t.r[:-1] < R + 1)]))
            late = rep.fd_derivative[rep.midpoints > (flip[1] if flip else R)]
            good &= flip is not None and flip[0] - h <= R <= flip[1] + h
            good &= bool(np.all(late < 0))
            m["subcritical_flip"] = list(flip) if flip else None
            m["R_np"] = R
        else:
            psi = pohozaev_Psi(params.n, params.p, t)[1:]
            nondecreasing = bool(np.all(np.diff(psi) >= -1e-9 * np.max(np.abs(psi))))
            good &= sign == "positive" and nondecreasing
            m["sublinear_nondecreasing"] = nondecreasing
        m[f"{name}_identity_err"] = rep.max_rel_err
        m[f"{name}_psi_sign"] = sign
        ok &= bool(good)
    return "functional monotonicity suite", ok, m


def c9_blowup():
    s0 = integrate_euclidean(3, 2, 1.0, 10.0).zeros[0].r
    r_alpha = cl.first_zero(3, 2, 1e4)
    scaled = r_alpha * 1e4 ** 0.5
    pi_est = integrate_euclidean(3, 1.0, 1.0, 4.0, tol=1e-12, linear_weight=1.0).zeros[0].r
    m = {"S0": s0, "r_alpha_sqrt_alpha": scaled, "rel_err": abs(scaled / s0 - 1),
         "linear_first_zero_err": abs(pi_est - math.pi)}
    ok = within(scaled, s0, 0.02) and abs(pi_est - math.pi) <= 1e-8
    return "Euclidean blow-up scaling", ok, m


def c10_linear():
    s = linear_solve(3, 0.5, 50.0)
    lb = linear_lower_bound_check(s.trajectory, 3, 0.5)
    _, theta = theta_series(s.trajectory)
    lam1 = lambda_pair(3, 0.5)[0]
    b = linear_solve(3, 1.0, 40.0)
    rr = np.linspace(5.0, 40.0, 701)
    ratio = b.trajectory.evaluate(rr)[0] / ((1 + rr) * np.exp(-rr))
    o = linear_solve(3, 2.0, 30.0)
    m = {"c0.5_zeros": len(s.trajectory.zeros), "c0.5_lower_bound": lb.holds,
         "theta_50": float(theta[-1]), "minus_lambda1": -lam1,
         "c1_zeros": len(b.trajectory.zeros), "c1_ratio_min": float(ratio.min()),
         "c1_ratio_max": float(ratio.max()), "c2_zeros": len(o.trajectory.zeros)}
    lo, hi = LINEAR_BORDERLINE_BAND
    ok = (not s.trajectory.zeros and lb.holds and abs(theta[-1] + 0.29289) <= 1e-3
          and not b.trajectory.zeros and lo <= ratio.min() and ratio.max() <= hi
          and len(o.trajectory.zeros) >= 5)
    return "linear-case suite", ok, m


def c11_curvature():
    # alpha = 4 at c = 2 is the image of alpha = 1 at c = 1
    params = Params(3, 2, 4.0, c=2.0)
    unit_params = rescale_curvature(params)
    unit = integrate(unit_params, 5.0)
    direct = integrate(params, 2.5)
    grid = np.linspace(0.0, 5.0, 501)
    r_c, u_pull, _ = pullback(grid, *unit.evaluate(grid), c=2.0, p=2.0)
    err = float(np.max(np.abs(direct.evaluate(r_c)[0] - u_pull)))
    m = {"unit_alpha": unit_params.alpha, "max_abs_diff": err}
    return "curvature rescaling", err <= 1e-6 and unit_params.alpha == 1.0, m


def c12_determinism():
    from .cli import main
    commands = [
        ["solve", "-n", "3", "-p", "2", "--alpha", "2,4,6,8", "--plot", "solution"],
        ["solve", "-n", "3", "-p", "6", "--alpha", "1,2", "--plot", "phase",
         "--format", "json"],
        ["separatrix", "-n", "3", "-p", "2"],
        ["sweep", "-n", "3", "-p", "2", "--alpha-range", "6.1:30:5", "--mode", "first-zero"],
    ]
    digests = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            files = {}
            for i, cmd in enumerate(commands):
                out = Path(tmp) / f"run{i}"
                main(cmd + ["--out", str(out)], quiet=True)
                for f in sorted(out.rglob("*")):
                    if f.is_file():
                        files[str(f.relative_to(tmp))] = f.read_bytes()
            digests.append(files)
    same = digests[0] == digests[1] and len(digests[0]) > 0
    return "byte-identical outputs", same, {"files_compared": len(digests[0])}


CRITERIA = {
    1: (c1_separatrix, 30.0),
    2: (c2_closed_forms, 1.0),
    3: (c3_supercritical, 10.0),
    4: (c4_subcritical_slow, 10.0),
    5: (c5_one_zero_band, 20.0),
    6: (c6_finite_zeros, 30.0),
    7: (c7_sublinear, 10.0),
    8: (c8_functionals, 10.0),
    9: (c9_blowup, 10.0),
    10: (c10_linear, 10.0),
    11: (c11_curvature, 5.0),
    12: (c12_determinism, 60.0),
}

SUITES = {
    "separatrix": (1,),
    "exact": (2,),
    "decay": (3, 4, 5),
    "oscillation": (6, 7),
    "functional": (8,),
    "scaling": (9, 11),
    "linear": (10,),
    "determinism": (12,),
}
SUITES["all"] = tuple(sorted(CRITERIA))


def run_criterion(cid: int) -> CriterionResult:
    fn, budget = CRITERIA[cid]
    t0 = time.perf_counter()
    name, ok, measured = fn()
    elapsed = time.perf_counter() - t0
    return CriterionResult(cid, name, bool(ok), measured, budget, elapsed)


def run_suite(name: str = "all", echo=None) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for cid in SUITES[name]:
        res = run_criterion(cid)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
