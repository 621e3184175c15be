"""Command-line entry point: hyperem {solve,separatrix,sweep,verify,exact,linear}."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance, classify as cl
from .errors import HyperemError
from .exact import (Family, exact_ground_state, linear_lower_bound_check, linear_solve)
from .geometry import Params
from .io import (to_json, write_csv, write_events_json, write_json, write_text,
                 write_trajectory_csv, fmt_float)
from .ode import integrate
from .parallel import map_ordered
from .svg import trajectory_chart


def _number(text) -> float:
    """Float, also accepting fractions such as 5/3."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _number_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [_number(x) for x in text]
    return [_number(x) for x in str(text).split(",") if x.strip()]


def _alpha_range(text) -> list:
    try:
        a, b, k = str(text).split(":")
        k = int(k)
    except ValueError:
        raise argparse.ArgumentTypeError("expected --alpha-range a:b:k") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k must be >= 1")
    return [float(x) for x in np.linspace(_number(a), _number(b), k)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 3
    p: float = 2.0
    alpha: tuple = (1.0,)
    curvature: float = 1.0
    r_max: float = 50.0
    tol: float = 1e-10
    out: str = "out"
    plot: str | None = None
    format: str = "csv"
    # subcommand options
    mode: str = "classify"
    bracket: tuple = (1.0, 2.0)
    tol_alpha: float = 1e-3
    k: int = 1
    alpha_hi: float = 1e5
    family: str | None = None
    c: tuple = (0.5, 1.0, 2.0)
    suite: str = "all"

    def validate(self) -> "RunConfig":
        if int(self.n) != self.n or self.n < 2:
            raise HyperemError(f"-n must be an integer >= 2, got {self.n}")
        if not self.p > 0:
            raise HyperemError(f"-p must be positive, got {self.p}")
        if not self.curvature > 0:
            raise HyperemError("--curvature must be positive")
        if not self.r_max > 0:
            raise HyperemError("--r-max must be positive")
        if not 1e-13 <= self.tol <= 1e-3:
            raise HyperemError("--tol must lie in [1e-13, 1e-3]")
        if not self.alpha:
            raise HyperemError("--alpha needs at least one value")
        if self.plot not in (None, "solution", "phase"):
            raise HyperemError("--plot must be solution or phase")
        if self.format not in ("json", "csv"):
            raise HyperemError("--format must be json or csv")
        return replace(self, n=int(self.n), alpha=tuple(float(a) for a in self.alpha))


_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _add_common(sp):
    sp.add_argument("-n", type=int, default=None, help="dimension")
    sp.add_argument("-p", type=_number, default=None, help="exponent (fractions allowed)")
    sp.add_argument("--alpha", type=_number_list, default=None, help="u(0), comma separated")
    sp.add_argument("--curvature", type=_number, default=None, help="curvature scale c")
    sp.add_argument("--r-max", dest="r_max", type=_number, default=None)
    sp.add_argument("--tol", type=_number, default=None)
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--plot", choices=("solution", "phase"), default=None)
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--config", default=None, help="JSON file with defaults for these flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperem",
                                 description="Radial Emden-Fowler solutions on hyperbolic space")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="integrate and classify one or more alphas")
    _add_common(sp)

    sp = sub.add_parser("separatrix", help="bisect for the separatrix amplitude U(0)")
    _add_common(sp)
    sp.add_argument("--bracket", type=lambda s: tuple(_number(x) for x in s.split(":")),
                    default=None, help="lo:hi")
    sp.add_argument("--tol-alpha", dest="tol_alpha", type=_number, default=None)

    sp = sub.add_parser("sweep", help="classify over an alpha grid")
    _add_common(sp)
    sp.add_argument("--alpha-range", dest="alpha_range", type=_alpha_range, default=None,
                    help="a:b:k, k evenly spaced values")
    sp.add_argument("--mode", choices=("classify", "first-zero", "threshold"), default=None)
    sp.add_argument("--k", type=int, default=None, help="target zero count (threshold mode)")
    sp.add_argument("--alpha-hi", dest="alpha_hi", type=_number, default=None)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(sp)
    sp.add_argument("--suite", choices=sorted(acceptance.SUITES), default=None)

    sp = sub.add_parser("exact", help="validate the closed-form ground states")
    _add_common(sp)
    sp.add_argument("--family", choices=("A", "B", "C"), default=None)

    sp = sub.add_parser("linear", help="solve the linear equation u'' + (n-1)coth u' + c u = 0")
    _add_common(sp)
    sp.add_argument("--c", type=_number_list, default=None, help="spectral parameters")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then explicit flags."""
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise HyperemError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key, val in vars(args).items():
        if key in _CONFIG_KEYS and val is not None:
            values[key] = val
    if getattr(args, "alpha_range", None) is not None:
        values["alpha"] = args.alpha_range
    for key in ("alpha", "c"):
        if key in values:
            values[key] = tuple(_number_list(values[key]))
    for key in ("p", "curvature", "r_max", "tol", "tol_alpha", "alpha_hi"):
        if key in values:
            values[key] = _number(values[key])
    if "bracket" in values:
        values["bracket"] = tuple(_number(x) for x in values["bracket"])
    return RunConfig(command=args.command, **values).validate()


def _tag(alpha: float) -> str:
    return fmt_float(alpha).replace("-", "m")


# ---------------------------------------------------------------------------


def _solve_one(job):
    n, p, alpha, c, r_max, tol = job
    traj = integrate(Params(n, p, alpha, c), r_max, tol)
    return traj.with_label(f"alpha={alpha:.4g}"), cl.classify_trajectory(traj)


def _summary_rows(reports):
    return [(r.params.alpha, r.zero_count, r.decay.law.value, r.decay.fitted_rate,
             r.decay.fitted_constant) for r in reports]


def _write_summary(cfg, out, reports):
    if cfg.format == "json":
        write_json(out / "summary.json", [r.to_dict() for r in reports])
    else:
        write_csv(out / "summary.csv",
                  ("alpha", "zeros", "decay_law", "fitted_rate", "fitted_constant"),
                  _summary_rows(reports))


def cmd_solve(cfg: RunConfig, echo) -> int:
    out = Path(cfg.out)
    jobs = [(cfg.n, cfg.p, a, cfg.curvature, cfg.r_max, cfg.tol) for a in cfg.alpha]
    results = map_ordered(_solve_one, jobs)
    for (traj, rep) in results:
        tag = _tag(rep.params.alpha)
        write_trajectory_csv(out / f"trajectory_alpha_{tag}.csv", traj)
        write_events_json(out / f"events_alpha_{tag}.json", traj)
        write_json(out / f"report_alpha_{tag}.json", rep.to_dict())
        echo(f"alpha={rep.params.alpha:.6g}: {rep.sign_class.value}, zeros={rep.zero_count}, "
             f"decay={rep.decay.law.value}, termination={rep.termination.value}")
    _write_summary(cfg, out, [rep for _, rep in results])
    if cfg.plot:
        write_text(out / f"plot_{cfg.plot}.svg",
                   trajectory_chart([t for t, _ in results], cfg.plot))
    return 0


def cmd_separatrix(cfg: RunConfig, echo) -> int:
    out = Path(cfg.out)
    res = cl.find_separatrix(cfg.n, cfg.p, cfg.bracket, cfg.tol_alpha, cfg.tol)
    write_csv(out / "separatrix_trace.csv", ("iter", "lo", "hi", "decision"),
              [(row.iteration, row.lo, row.hi, row.decision) for row in res.trace])
    write_json(out / "separatrix.json",
               {"n": cfg.n, "p": cfg.p, "alpha_star": res.alpha_star, "lo": res.lo,
                "hi": res.hi, "probes": res.probes, "converged": res.converged})
    echo(f"{res.alpha_star:.6f}")
    return 0


def _first_zero_job(job):
    n, p, alpha, tol = job
    return cl.first_zero(n, p, alpha, tol)


def cmd_sweep(cfg: RunConfig, echo) -> int:
    out = Path(cfg.out)
    if cfg.mode == "classify":
        jobs = [(cfg.n, cfg.p, a, cfg.curvature, cfg.r_max, cfg.tol) for a in cfg.alpha]
        reports = [rep for _, rep in map_ordered(_solve_one, jobs)]
        for i, rep in enumerate(reports):
            write_json(out / f"report_{i:04d}.json", rep.to_dict())
        _write_summary(cfg, out, reports)
        for row in _summary_rows(reports):
            echo(",".join(str(x) for x in row))
        return 0
    if cfg.mode == "first-zero":
        cl._require_subcritical(cfg.n, cfg.p)
        alphas = sorted(cfg.alpha)
        r_alpha = map_ordered(_first_zero_job, [(cfg.n, cfg.p, a, cfg.tol) for a in alphas])
        rows = list(zip(alphas, r_alpha))
        write_csv(out / "first_zero_map.csv", ("alpha", "r_alpha"), rows)
        for a, r in rows:
            echo(f"{a:.6g},{r:.10g}")
        return 0
    # the smallest --alpha value is the lower end of the scanned bracket
    res = cl.zero_count_threshold(cfg.n, cfg.p, cfg.k, cfg.alpha_hi, alpha_lo=min(cfg.alpha),
                                  tol=cfg.tol)
    write_json(out / "threshold.json",
               {"n": cfg.n, "p": cfg.p, "k": res.k, "alpha_k": res.alpha_k, "lo": res.lo,
                "hi": res.hi, "status": res.status, "probes": res.probes,
                "scan": [list(s) for s in res.scan]})
    echo(f"alpha_{res.k} = {res.alpha_k:.6f} [{res.status}]")
    return 0


def cmd_verify(cfg: RunConfig, echo) -> int:
    results = acceptance.run_suite(cfg.suite, echo=echo)
    n_ok = sum(r.ok for r in results)
    echo(f"{n_ok}/{len(results)} criteria passed")
    if cfg.out:
        write_json(Path(cfg.out) / f"acceptance_{cfg.suite}.json",
                   [r.record() for r in results])
    return 0 if n_ok == len(results) else 1


def cmd_exact(cfg: RunConfig, echo) -> int:
    families = [cfg.family] if cfg.family else ["A", "B", "C"]
    grid = np.linspace(0.0, 10.0, 1001)
    records = []
    for fam in families:
        U = exact_ground_state(cfg.n, Family(fam))
        rec = U.verify_record(grid)
        records.append(rec)
        echo(to_json(rec).strip())
        u, du, ddu = U.evaluate(grid)
        write_csv(Path(cfg.out) / f"exact_{fam}_n{cfg.n}.csv", ("r", "U", "dU", "ddU"),
                  zip(grid, u, du, ddu))
    write_json(Path(cfg.out) / "exact_verify.json", records)
    return 0


def cmd_linear(cfg: RunConfig, echo) -> int:
    out = Path(cfg.out)
    records = []
    for c in cfg.c:
        sol = linear_solve(cfg.n, c, cfg.r_max, cfg.tol)
        rec = {"n": cfg.n, "c": c, "classification": sol.classification.value,
               "zeros": len(sol.trajectory.zeros), "r_end": sol.trajectory.r_end}
        if sol.classification.value == "PositiveSlowDecay":
            lb = linear_lower_bound_check(sol.trajectory, cfg.n, c)
            rec["lower_bound_holds"] = lb.holds
            rec["lower_bound_min_gap"] = lb.min_gap
        records.append(rec)
        write_trajectory_csv(out / f"linear_c_{_tag(c)}.csv", sol.trajectory)
        echo(f"c={c:.6g}: {rec['classification']}, zeros={rec['zeros']}")
    write_json(out / "linear.json", records)
    return 0


COMMANDS = {"solve": cmd_solve, "separatrix": cmd_separatrix, "sweep": cmd_sweep,
            "verify": cmd_verify, "exact": cmd_exact, "linear": cmd_linear}


def main(argv=None, quiet: bool = False) -> int:
    args = build_parser().parse_args(argv)

    def echo(msg):
        if not quiet:
            print(msg, flush=True)

    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg, echo)
    except (HyperemError, OSError, json.JSONDecodeError) as exc:
        print(f"hyperem {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
