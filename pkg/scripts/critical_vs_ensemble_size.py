"""Necessary and sufficient critical polarizations against M at fixed N.

Writes one CSV per database size and prints the gamma-scaling ratios between
the two sizes at a few fractions of M_max.
"""

import argparse
from pathlib import Path

import numpy as np

from ensemble_grover.cli import SWEEP_COLUMNS, write_records
from ensemble_grover.critical import m_max, necessary_window_start, scaling_check, sweep_ensemble_sizes
from ensemble_grover.grover import ProblemSpec, Scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1e10,1e14")
    parser.add_argument("--points", type=int, default=60)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    sizes = [int(float(s)) for s in args.sizes.split(",")]
    for N in sizes:
        problem = ProblemSpec(N, Scenario.TYPICAL)
        start, stop = necessary_window_start(problem.q, N), m_max(problem.q, N)
        grid = np.unique(np.linspace(start, stop, args.points).round().astype(int))
        rows = sweep_ensemble_sizes(problem, grid.tolist())
        path = outdir / f"critical_vs_m_N{N:.0e}.csv"
        with path.open("w", newline="") as handle:
            write_records([r.__dict__ for r in rows], SWEEP_COLUMNS, "csv", handle)
        print(f"N={N:.0e}: {len(rows)} rows -> {path}")

    if len(sizes) == 2:
        small, large = sizes
        gamma = large / small
        top = m_max(ProblemSpec(small, Scenario.TYPICAL).q, small)
        print(f"gamma = {gamma:.0e}, expected ratio {gamma ** -0.25:.4f}")
        for frac in (0.6, 0.8, 0.95):
            M = round(frac * top)
            necc = scaling_check(gamma, M, small, "necc")
            suff = scaling_check(gamma, M, small, "suff")
            corr = scaling_check(gamma, M, small, "suff", corrected=True)
            print(f"  M/M_max={frac:.2f}: necc {necc:.5f}  suff {suff:.5f}  suff corrected {corr:.5f}")


if __name__ == "__main__":
    main()
