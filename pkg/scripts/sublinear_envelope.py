"""Envelope decay of the oscillating sublinear solution.

Fits log|u| at critical points against their radii on a sequence of windows
and prints the rate next to two reference values: the guaranteed lower-bound
exponent (n-1)/(p+1) and the energy-balance rate 2(n-1)/(p+3) obtained by
averaging u'^2 against |u|^(p+1) over one oscillation.
"""

import argparse

import numpy as np

from hyperem.diagnostics import DecayLaw, decay_fit
from hyperem.errors import InsufficientDataError
from hyperem.geometry import Params
from hyperem.ode import integrate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=3)
    ap.add_argument("-p", type=float, default=0.5)
    ap.add_argument("--r-max", type=float, default=60.0)
    ap.add_argument("--max-steps", type=int, default=400_000)
    args = ap.parse_args()
    n, p = args.n, args.p

    t = integrate(Params(n, p, 1.0), args.r_max, max_steps=args.max_steps)
    print(f"termination={t.termination.value} r_end={t.r_end:.4f} zeros={len(t.zeros)} "
          f"critical_points={len(t.critical_points)}")
    lower = (n - 1) / (p + 1)
    virial = 2 * (n - 1) / (p + 3)
    print(f"lower-bound exponent {lower:.6f}   energy-balance rate {virial:.6f}")
    edges = np.linspace(2.0, t.r_end, 6)
    for lo, hi in zip(edges, edges[1:]):
        try:
            est = decay_fit(t, DecayLaw.SUBLINEAR_ENVELOPE, window=(lo, hi))
        except InsufficientDataError as exc:
            print(f"[{lo:7.3f}, {hi:7.3f}]  {exc}")
            continue
        print(f"[{lo:7.3f}, {hi:7.3f}]  rate={est.fitted_rate:.6f}  residual={est.residual:.2e}")
    cps = t.critical_points
    g = np.log(np.abs([e.value for e in cps])) + lower * np.array([e.r for e in cps])
    print(f"log|u(rho_k)| + lower*rho_k: first {g[0]:.4f}  min {g.min():.4f}  last {g[-1]:.4f}")


if __name__ == "__main__":
    main()
