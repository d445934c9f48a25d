"""Critical polarizations at fixed classical success probability, with log-log fits."""

import argparse
import math
from pathlib import Path

import numpy as np

from ensemble_grover.cli import SWEEP_COLUMNS, write_records
from ensemble_grover.critical import loglog_fit, sweep_fixed_success


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p-target", type=float, default=0.90)
    parser.add_argument("--log-min", type=float, default=8.0)
    parser.add_argument("--log-max", type=float, default=16.0)
    parser.add_argument("--points", type=int, default=9)
    parser.add_argument("--eps-goal", type=float, default=1e-5, help="polarization to extrapolate the fits to")
    parser.add_argument("--out", default="results/fixed_success.csv")
    args = parser.parse_args()

    sizes = [int(round(10.0**e)) for e in np.linspace(args.log_min, args.log_max, args.points)]
    rows = sweep_fixed_success(args.p_target, sizes)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as handle:
        write_records([r.__dict__ for r in rows], SWEEP_COLUMNS, "csv", handle)

    for column in ("eps_necc", "eps_suff"):
        fit = loglog_fit(rows, column)
        log_n = (math.log10(args.eps_goal) - fit.intercept) / fit.slope
        print(
            f"{column}: log10 eps = {fit.intercept:.4f} {fit.slope:+.4f} log10 N"
            f"  (rss {fit.rss:.2e}); eps = {args.eps_goal:g} at N ~ 10^{log_n:.2f}"
        )


if __name__ == "__main__":
    main()
