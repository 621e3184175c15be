"""Regenerate the three phase/solution plots that illustrate the regimes.

    python3 scripts/reproduce_figures.py [OUT_DIR]

supercritical_phase/ : n=3, p=6, alpha in {1, 2, 3}, phase plane
subcritical_profiles/: n=3, p=2, alpha in {2, 4, 6, 8}; the alpha=6 curve is the ground state
sublinear_phase/     : n=3, p=0.5, alpha=1, spiral into the origin
"""

import sys
from pathlib import Path

from hyperem.cli import main

RUNS = {
    "supercritical_phase": ["-n", "3", "-p", "6", "--alpha", "1,2,3", "--plot", "phase"],
    "subcritical_profiles": ["-n", "3", "-p", "2", "--alpha", "2,4,6,8", "--plot", "solution",
                             "--r-max", "10"],
    "sublinear_phase": ["-n", "3", "-p", "0.5", "--alpha", "1", "--plot", "phase",
                        "--r-max", "15"],
}


def run(out_root: Path) -> int:
    for name, args in RUNS.items():
        code = main(["solve", *args, "--out", str(out_root / name)], quiet=True)
        if code:
            return code
        print(f"{name}: {sorted(p.name for p in (out_root / name).glob('*.svg'))}")
    return 0


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "figures")))
