"""Monte Carlo failure rates against the analytic single-bit and two-qubit values."""

import argparse
import time

from ensemble_grover.grover import q_std
from ensemble_grover.montecarlo import OutcomeModel, comparison_sigma, estimate_failures
from ensemble_grover.stats import pfail_all_bounds, psall_two_qubit


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--sizes", default="4,8,16")
    args = parser.parse_args()

    print(f"{'N':>3} {'M':>3} {'eps':>5} {'one (mc)':>10} {'one':>10} {'all (mc)':>10} {'all lo':>10} {'all hi':>10}  ok")
    start = time.perf_counter()
    for N in (int(s) for s in args.sizes.split(",")):
        for M in (1, 3, 5, 11, 21):
            for eps in (0.0, 0.3, 0.7, 1.0):
                model = OutcomeModel(N, q_std(N), eps)
                stats = estimate_failures(model, M, args.trials, args.seed)
                lo, hi = pfail_all_bounds(model.eps_eff, M, N)
                one_lo = lo
                if N == 4:
                    lo = hi = 1.0 - psall_two_qubit(model.eps_eff, M)
                s_one = comparison_sigma(stats.per_bit_rate, args.trials * model.n)
                s_all = comparison_sigma(stats.all_bit_rate, args.trials)
                ok = abs(stats.per_bit_rate - one_lo) <= 3 * s_one + 1e-15 and (
                    lo - 3 * s_all <= stats.all_bit_rate <= hi + 3 * s_all
                )
                print(
                    f"{N:>3} {M:>3} {eps:>5.2f} {stats.per_bit_rate:>10.6f} {one_lo:>10.6f}"
                    f" {stats.all_bit_rate:>10.6f} {lo:>10.6f} {hi:>10.6f}  {'yes' if ok else 'NO'}"
                )
    print(f"elapsed {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
