"""Command-line front end.

Subcommands:

* ``compute``  closed-form quantities and failure probabilities at one point,
* ``sweep``    critical polarizations over ``M`` at fixed ``N`` or over ``N`` at fixed classical success,
* ``fit``      log-log least squares on a sweep CSV,
* ``simulate`` Monte Carlo failure rates joined with their analytic values.

Exit codes: 0 on success, 2 for invalid input, 3 when a numerical routine fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from decimal import Decimal, InvalidOperation
from typing import Any, Sequence, TextIO

from .critical import (
    SolverConfig,
    SweepRow,
    generalized_m_max,
    generalized_scaling_exponent,
    loglog_fit,
    necessary_window_start,
    pfail_classical,
    scaling_check,
    sweep_ensemble_sizes,
    sweep_fixed_success,
)
from .grover import ProblemSpec, Scenario, amplitudes, q_std, theta
from .montecarlo import OutcomeModel, comparison_sigma, estimate_failures
from .special import ConvergenceError
from .stats import (
    EXACT_MAX_M,
    TWO_QUBIT_MAX_M,
    FailureProbabilityRequest,
    pfail_all_bounds,
    pfail_one,
    pfail_one_beta,
    pfail_one_exact,
    pfail_one_gauss,
    psall_two_qubit,
)

log = logging.getLogger("ensemble_grover")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


class UsageError(ValueError):
    """Invalid flag combination detected after parsing."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    N: int | None = None
    M: int | None = None
    eps: float | None = None
    q: int | None = None
    scenario: str | None = None
    p_target: float | None = None
    N_list: tuple[int, ...] = ()
    gamma: float | None = None
    alpha: float = 1.0
    trials: int = 10**6
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"


# ---------------------------------------------------------------- parsing


def parse_int_like(text: str) -> int:
    """Integer from ``"10000000000"``, ``"1e10"`` or ``"2**40"``; fractional values are rejected."""
    text = text.strip()
    if "**" in text:
        base, _, exp = text.partition("**")
        return parse_int_like(base) ** parse_int_like(exp)
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(value)


def parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(parse_int_like(part) for part in text.split(",") if part.strip())


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, tuple):
        return [_json_value(v) for v in value]
    return value


def write_records(records: Sequence[dict], columns: Sequence[str], fmt: str, stream: TextIO) -> None:
    """Serialize ``records`` as CSV (header always written) or a JSON list."""
    if fmt == "json":
        payload = [{c: _json_value(r.get(c)) for c in columns} for r in records]
        json.dump(payload, stream, indent=2)
        stream.write("\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_value(record.get(c)) for c in columns])


def read_sweep_csv(path: str) -> list[SweepRow]:
    """Parse a sweep CSV back into rows; empty cells become ``None``."""
    rows = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SWEEP_COLUMNS:
            raise UsageError(f"{path}: expected header {','.join(SWEEP_COLUMNS)}")
        for raw in reader:
            def num(key: str) -> float | None:
                return float(raw[key]) if raw[key] != "" else None

            rows.append(
                SweepRow(
                    int(raw["N"]),
                    int(raw["M"]),
                    int(raw["q"]),
                    float(raw["p_target"]),
                    num("eps_necc"),
                    num("eps_suff"),
                    num("residual_necc"),
                    num("residual_suff"),
                )
            )
    return rows


# ---------------------------------------------------------------- commands


def _problem(cfg: RunConfig) -> ProblemSpec:
    if cfg.N is None:
        raise UsageError("--n-db is required")
    if cfg.scenario is None:
        return ProblemSpec.auto(cfg.N, cfg.q)
    return ProblemSpec(cfg.N, Scenario(cfg.scenario), cfg.q)


def _require(cfg: RunConfig, *names: str) -> None:
    flags = {"M": "--m", "eps": "--eps", "p_target": "--p-target"}
    missing = [flags.get(n, n) for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"{cfg.subcommand} requires {', '.join(missing)}")


def compute(cfg: RunConfig) -> list[dict]:
    problem = _problem(cfg)
    alpha, _ = amplitudes(problem.N, problem.q)
    record: dict[str, Any] = {
        "N": problem.N,
        "n": problem.n,
        "scenario": problem.scenario.value,
        "q": problem.q,
        "theta": theta(problem.N),
        "q_std": q_std(problem.N),
        "alpha_sq": alpha * alpha,
        "m_max": generalized_m_max(cfg.alpha, problem.N, problem.q),
    }
    if cfg.eps is not None or (cfg.M is not None and cfg.gamma is None):
        _require(cfg, "M", "eps")
        M, eps = cfg.M, cfg.eps
        eps_eff = problem.effective_polarization(eps)
        chosen = pfail_one(FailureProbabilityRequest(eps_eff, M))
        lower, upper = pfail_all_bounds(eps_eff, M, problem.N)
        record.update(
            M=M,
            eps=eps,
            eps_eff=eps_eff,
            pfail_one_exact=pfail_one_exact(eps_eff, M) if M <= EXACT_MAX_M else None,
            pfail_one_beta=pfail_one_beta(eps_eff, M),
            pfail_one_gauss=pfail_one_gauss(eps_eff, M),
            method=chosen.method.value,
            pfail_one=chosen.value,
            pfail_all_lower=lower,
            pfail_all_upper=upper,
            pfail_classical=pfail_classical(problem.q * M, problem.N),
        )
        if problem.N == 4 and M % 2 == 1 and M <= TWO_QUBIT_MAX_M:
            record["pfail_all_exact"] = 1.0 - psall_two_qubit(eps_eff, M)
    if cfg.gamma is not None:
        _require(cfg, "M")
        record.update(
            gamma=cfg.gamma,
            alpha=cfg.alpha,
            expected_ratio=cfg.gamma ** generalized_scaling_exponent(cfg.alpha),
            ratio_necc=scaling_check(cfg.gamma, cfg.M, problem.N, "necc", alpha=cfg.alpha),
            ratio_suff=scaling_check(cfg.gamma, cfg.M, problem.N, "suff", alpha=cfg.alpha),
            ratio_suff_corrected=scaling_check(cfg.gamma, cfg.M, problem.N, "suff", corrected=True, alpha=cfg.alpha),
        )
    return [record]


def _m_range(problem: ProblemSpec, args: argparse.Namespace) -> list[int]:
    if args.m is not None:
        return [args.m]
    top = generalized_m_max(1.0, problem.N, problem.q)
    start = args.m_start if args.m_start is not None else necessary_window_start(problem.q, problem.N)
    stop = args.m_stop if args.m_stop is not None else top
    if args.m_step is not None:
        if args.m_step < 1:
            raise UsageError("--m-step must be >= 1")
        return list(range(start, stop + 1, args.m_step))
    if stop < start:
        return []
    points = min(args.points, stop - start + 1)
    if points == 1:
        return [start]
    return sorted({round(start + i * (stop - start) / (points - 1)) for i in range(points)})


def sweep(cfg: RunConfig, args: argparse.Namespace) -> list[dict]:
    solver = SolverConfig()
    if cfg.p_target is not None:
        if not cfg.N_list:
            raise UsageError("--p-target needs --n-list")
        rows = sweep_fixed_success(cfg.p_target, cfg.N_list, solver)
    else:
        problem = _problem(cfg)
        rows = sweep_ensemble_sizes(problem, _m_range(problem, args), solver)
    return [asdict(r) for r in rows]


FIT_COLUMNS = ("column", "slope", "intercept", "rss", "points")


def fit(args: argparse.Namespace) -> list[dict]:
    rows = read_sweep_csv(args.input)
    results = []
    for column in ("eps_necc", "eps_suff"):
        usable = [r for r in rows if getattr(r, column) is not None and getattr(r, column) > 0]
        results.append(asdict(loglog_fit(usable, column)))
    return results


SIM_COLUMNS = ("quantity", "empirical", "sigma", "analytic_lower", "analytic_upper", "within_3sigma")


def simulate(cfg: RunConfig) -> list[dict]:
    _require(cfg, "M", "eps")
    problem = _problem(cfg)
    if cfg.trials < 1:
        raise UsageError("--trials must be >= 1")
    model = OutcomeModel(problem.N, problem.q, cfg.eps)
    stats = estimate_failures(model, cfg.M, cfg.trials, cfg.seed)
    eps_eff = model.eps_eff
    lower, upper = pfail_all_bounds(eps_eff, cfg.M, problem.N)
    if problem.N == 4 and cfg.M % 2 == 1 and cfg.M <= TWO_QUBIT_MAX_M:
        exact_all = 1.0 - psall_two_qubit(eps_eff, cfg.M)
        all_range = (exact_all, exact_all)
    else:
        all_range = (lower, upper)

    def entry(name: str, rate: float, trials: int, lo: float, hi: float) -> dict:
        sigma = comparison_sigma(rate, trials)
        ok = lo - 3.0 * sigma <= rate <= hi + 3.0 * sigma
        return dict(quantity=name, empirical=rate, sigma=sigma, analytic_lower=lo, analytic_upper=hi, within_3sigma=ok)

    records = [
        entry(f"pfail_bit{j + 1}", float(rate), cfg.trials, lower, lower)
        for j, rate in enumerate(stats.per_bit_rates)
    ]
    records.append(entry("pfail_one_pooled", stats.per_bit_rate, cfg.trials * model.n, lower, lower))
    records.append(entry("pfail_all", stats.all_bit_rate, cfg.trials, *all_range))
    return records


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensemble-grover", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")

    def problem_flags(p: argparse.ArgumentParser, n_required: bool = False) -> None:
        p.add_argument("--n-db", type=parse_int_like, required=n_required, help="database size N, e.g. 1e10 or 2**40")
        p.add_argument("--q", type=int, help="oracle calls per member (exact scenario only)")
        p.add_argument(
            "--scenario",
            choices=[s.value for s in Scenario],
            help="exact (N = 2^n) or typical (eps_eff = eps); default: exact for powers of two",
        )

    p = sub.add_parser("compute", help="closed-form quantities at one (N, M, eps)")
    problem_flags(p, n_required=True)
    p.add_argument("--m", type=parse_int_like)
    p.add_argument("--eps", type=float)
    p.add_argument("--gamma", type=float, help="also report the gamma-scaling ratios at this M")
    p.add_argument("--alpha", type=float, default=1.0, help="resource exponent in (qM)^alpha = Q")
    common(p)

    p = sub.add_parser("sweep", help="critical polarizations over M (fixed N) or over N (fixed p_target)")
    problem_flags(p)
    p.add_argument("--m", type=parse_int_like, help="single ensemble size")
    p.add_argument("--m-start", type=parse_int_like, help="first M (default: ceil(N/(2q)))")
    p.add_argument("--m-stop", type=parse_int_like, help="last M (default: M_max)")
    p.add_argument("--m-step", type=parse_int_like, help="stride; otherwise --points evenly spaced values")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--p-target", type=float, help="classical success probability for the fixed-success sweep")
    p.add_argument("--n-list", type=parse_int_list, default=(), help="comma-separated N values")
    common(p)

    p = sub.add_parser("fit", help="log-log least squares of a sweep CSV")
    p.add_argument("input", help="CSV written by the sweep subcommand")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo failure rates against analytic values")
    problem_flags(p, n_required=True)
    p.add_argument("--m", type=parse_int_like, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=parse_int_like, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        N=getattr(args, "n_db", None),
        M=getattr(args, "m", None),
        eps=getattr(args, "eps", None),
        q=getattr(args, "q", None),
        scenario=getattr(args, "scenario", None),
        p_target=getattr(args, "p_target", None),
        N_list=tuple(getattr(args, "n_list", ())),
        gamma=getattr(args, "gamma", None),
        alpha=getattr(args, "alpha", 1.0),
        trials=getattr(args, "trials", 10**6),
        seed=getattr(args, "seed", 0),
        out=args.out,
        fmt=args.fmt,
    )


def run(args: argparse.Namespace) -> tuple[list[dict], Sequence[str]]:
    cfg = _config(args)
    if cfg.subcommand == "compute":
        records = compute(cfg)
        columns: Sequence[str] = list(records[0])
    elif cfg.subcommand == "sweep":
        records, columns = sweep(cfg, args), SWEEP_COLUMNS
    elif cfg.subcommand == "fit":
        records, columns = fit(args), FIT_COLUMNS
    else:
        records, columns = simulate(cfg), SIM_COLUMNS
    return records, columns


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        records, columns = run(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", newline="") as handle:
            write_records(records, columns, args.fmt, handle)
    else:
        write_records(records, columns, args.fmt, sys.stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
