"""Critical polarizations against a probabilistic classical sequential search.

With equal aggregate oracle use ``Q = qM`` the classical search fails with
probability ``1 - Q/N``. The ensemble beats it once its all-bit failure
probability drops below that value. Because only ``p_one <= p_all <= n p_one``
is available in general, two polarizations are solved for:

* necessary: ``p_one(eps, M) = 1 - qM/N`` (below it the classical search wins),
* sufficient: ``p_one(eps, M) = (1 - qM/N)/n`` (above it the ensemble wins).

Both are found by bisection in ``eps``; ``p_one`` is monotone in ``eps`` and
the incomplete-beta route offers no cheap derivative.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .grover import ProblemSpec, Scenario, q_typical
from .parallel import THREADS_ENV, resolve_workers
from .special import ConvergenceError
from .stats import DEFAULT_THRESHOLDS, DispatchThresholds, failure_probability, psall_two_qubit

__all__ = [
    "SolverConfig",
    "RootResult",
    "CriticalResult",
    "SweepRow",
    "FitResult",
    "ClassicalSearchSpec",
    "pfail_classical",
    "m_max",
    "necessary_window_start",
    "classical_target",
    "solve_for_target",
    "necessary_root",
    "sufficient_root",
    "solve_necessary_eps",
    "solve_sufficient_eps",
    "solve_two_qubit_eps",
    "critical_polarizations",
    "scaling_check",
    "normal_quantile_correction",
    "sweep_fixed_success",
    "sweep_ensemble_sizes",
    "loglog_fit",
    "generalized_m_max",
    "generalized_scaling_exponent",
    "resolve_workers",
    "THREADS_ENV",
]

log = logging.getLogger(__name__)

@dataclass(frozen=True)
class SolverConfig:
    """Bisection stops when the bracket is narrower than ``xtol`` and the
    failure-probability residual is below ``ftol``."""

    xtol: float = 1e-10
    ftol: float = 1e-9
    max_iter: int = 200
    thresholds: DispatchThresholds = DEFAULT_THRESHOLDS


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class RootResult:
    eps: float | None
    target: float
    iterations: int = 0
    width: float = 0.0
    residual: float = 0.0
    status: str = "root"  # "root", "zero" (target >= 1/2), "none" (no eps in [0, 1])


@dataclass(frozen=True)
class CriticalResult:
    M: int
    N: int
    eps_necc: float | None
    eps_suff: float | None
    iterations: int
    residual: float
    necc: RootResult = field(repr=False)
    suff: RootResult = field(repr=False)


@dataclass(frozen=True)
class SweepRow:
    N: int
    M: int
    q: int
    p_target: float
    eps_necc: float | None
    eps_suff: float | None
    residual_necc: float | None = None
    residual_suff: float | None = None


@dataclass(frozen=True)
class FitResult:
    column: str
    slope: float
    intercept: float
    rss: float
    points: int


@dataclass(frozen=True)
class ClassicalSearchSpec:
    Q: int
    N: int

    def pfail(self) -> float:
        return pfail_classical(self.Q, self.N)


def _as_problem(N: int | ProblemSpec) -> ProblemSpec:
    if isinstance(N, ProblemSpec):
        return N
    return ProblemSpec.auto(int(N))


def _check_alpha(alpha: float) -> None:
    if alpha >= 2.0:
        raise ValueError(f"alpha = {alpha} >= 2: the classical search then succeeds with certainty")
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")


def pfail_classical(Q: int | float, N: int) -> float:
    """``max(0, 1 - Q/N)`` for ``Q`` queries at distinct random locations."""
    if N < 2:
        raise ValueError(f"database size must be at least 2, got {N}")
    if Q < 0:
        raise ValueError(f"query count must be nonnegative, got {Q}")
    if isinstance(Q, int):
        return max(0.0, float(Fraction(N - Q, N)))
    return max(0.0, 1.0 - Q / N)


def m_max(q: int, N: int) -> int:
    """Largest ensemble size whose matched classical search may still fail."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return int(N) // int(q)


def generalized_m_max(alpha: float, N: int, q: int | None = None) -> int:
    """``floor(N^(1/alpha)/q)`` for the resource comparison ``(qM)^alpha = Q``."""
    _check_alpha(alpha)
    if q is None:
        q = q_typical(int(N))
    if alpha == 1.0:
        return m_max(q, N)
    return math.floor(float(N) ** (1.0 / alpha) / q)


def generalized_scaling_exponent(alpha: float) -> float:
    """Exponent of ``N`` in the fixed-classical-success scaling of the critical polarization."""
    _check_alpha(alpha)
    return 0.25 - 1.0 / (2.0 * alpha)


def necessary_window_start(q: int, N: int) -> int:
    """``ceil(N/(2q))``; below it the classical search fails more often than not."""
    return -(-int(N) // (2 * int(q)))


def classical_target(problem: ProblemSpec, M: int, alpha: float = 1.0, form: str = "exact") -> float:
    """Classical failure probability matched to an ``M``-member ensemble.

    ``form="exact"`` uses ``1 - (qM)^alpha/N``; ``form="ratio"`` uses the
    approximation ``1 - M/M_max``, which reaches zero exactly at ``M_max``.
    """
    _check_alpha(alpha)
    N, q = problem.N, problem.q
    if form == "ratio":
        top = generalized_m_max(alpha, N, q)
        return max(0.0, 1.0 - M / top) if top > 0 else 0.0
    if form != "exact":
        raise ValueError(f"unknown classical form {form!r}")
    if alpha == 1.0:
        return pfail_classical(q * M, N)
    return pfail_classical(float(q * M) ** alpha, N)


def solve_for_target(
    problem: ProblemSpec, M: int, target: float, config: SolverConfig = DEFAULT_SOLVER
) -> RootResult:
    """Polarization at which the single-bit failure probability equals ``target``."""
    if M < 1:
        raise ValueError(f"ensemble size must be >= 1, got {M}")

    def excess(eps: float) -> float:
        return failure_probability(problem.effective_polarization(eps), M, thresholds=config.thresholds) - target

    if target >= 0.5:
        return RootResult(0.0, target, status="zero", residual=0.5 - target)
    at_one = excess(1.0)
    if target <= 0.0:
        if at_one <= 0.0:
            return RootResult(1.0, target, residual=at_one)
        return RootResult(None, target, status="none", residual=at_one)
    if at_one > 0.0:
        return RootResult(None, target, status="none", residual=at_one)

    return _bisect(excess, target, config, f"M={M}, N={problem.N}")


def _bisect(excess, target: float, config: SolverConfig, label: str) -> RootResult:
    """Root of a nonincreasing ``excess`` on ``[0, 1]`` with ``excess(0) > 0 >= excess(1)``."""
    lo, hi = 0.0, 1.0
    mid, f_mid = 0.5, math.inf
    for it in range(1, config.max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = excess(mid)
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= config.xtol and abs(f_mid) <= config.ftol:
            return RootResult(mid, target, it, hi - lo, abs(f_mid))
    if abs(f_mid) <= config.ftol and hi - lo <= config.xtol:
        return RootResult(mid, target, config.max_iter, hi - lo, abs(f_mid))
    raise ConvergenceError(f"bisection for {label}, target={target:.6g} did not converge", config.max_iter, abs(f_mid))


def solve_two_qubit_eps(M: int, config: SolverConfig = DEFAULT_SOLVER) -> RootResult:
    """Exact critical polarization for ``N = 4`` (odd ``M``), using the all-bit law.

    Lies between the necessary and sufficient values; used as a check on them.
    """
    target = pfail_classical(M, 4)

    def excess(eps: float) -> float:
        return 1.0 - psall_two_qubit(eps, M) - target

    if excess(0.0) <= 0.0:
        return RootResult(0.0, target, status="zero", residual=excess(0.0))
    at_one = excess(1.0)
    if at_one > 0.0:
        return RootResult(None, target, status="none", residual=at_one)
    return _bisect(excess, target, config, f"two-qubit M={M}")


def necessary_root(
    M: int, N: int | ProblemSpec, alpha: float = 1.0, form: str = "exact", config: SolverConfig = DEFAULT_SOLVER
) -> RootResult:
    problem = _as_problem(N)
    top = generalized_m_max(alpha, problem.N, problem.q)
    target = classical_target(problem, M, alpha, form)
    if M > top:
        return RootResult(None, target, status="none")
    return solve_for_target(problem, M, target, config)


def sufficient_root(
    M: int, N: int | ProblemSpec, alpha: float = 1.0, form: str = "exact", config: SolverConfig = DEFAULT_SOLVER
) -> RootResult:
    problem = _as_problem(N)
    if problem.n < 2:
        raise ValueError("the sufficient polarization needs at least two qubits")
    top = generalized_m_max(alpha, problem.N, problem.q)
    target = classical_target(problem, M, alpha, form) / problem.n
    if M > top:
        return RootResult(None, target, status="none")
    return solve_for_target(problem, M, target, config)


def solve_necessary_eps(M: int, N: int | ProblemSpec, **kwargs) -> float | None:
    """Necessary critical polarization; ``None`` beyond ``M_max``."""
    return necessary_root(M, N, **kwargs).eps


def solve_sufficient_eps(M: int, N: int | ProblemSpec, **kwargs) -> float | None:
    """Sufficient critical polarization; ``None`` beyond ``M_max``."""
    return sufficient_root(M, N, **kwargs).eps


def critical_polarizations(
    M: int, N: int | ProblemSpec, alpha: float = 1.0, form: str = "exact", config: SolverConfig = DEFAULT_SOLVER
) -> CriticalResult:
    problem = _as_problem(N)
    necc = necessary_root(M, problem, alpha, form, config)
    suff = sufficient_root(M, problem, alpha, form, config)
    return CriticalResult(
        M,
        problem.N,
        necc.eps,
        suff.eps,
        necc.iterations + suff.iterations,
        max(necc.width, suff.width),
        necc,
        suff,
    )


def normal_quantile_correction(target_from: float, target_to: float) -> float:
    """Ratio ``z_to/z_from`` of normal quantiles ``z = Phi^{-1}(1 - target)``.

    Under the normal approximation ``eps sqrt(M) = z``, so this is the factor
    by which a change of target alone moves ``eps`` at fixed ``M``.
    """
    unit = NormalDist()
    return unit.inv_cdf(1.0 - target_to) / unit.inv_cdf(1.0 - target_from)


def scaling_check(
    gamma: float,
    M: int,
    N: int,
    which: str = "necc",
    corrected: bool = False,
    alpha: float = 1.0,
    config: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """``eps(s M, gamma N)/eps(M, N)`` with ``s = gamma^(1/alpha - 1/2)``.

    The ratio is expected near ``gamma^(1/4 - 1/(2 alpha))``. With
    ``corrected=True`` the change of the root's target between the two
    problems (the ``1/n`` factor of the sufficient bound) is divided out
    through :func:`normal_quantile_correction`.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    solve = {"necc": necessary_root, "suff": sufficient_root}[which]
    big_N = int(round(N * gamma))
    big_M = int(round(M * gamma ** (1.0 / alpha - 0.5)))
    base = solve(M, N, alpha=alpha, config=config)
    scaled = solve(big_M, big_N, alpha=alpha, config=config)
    if base.eps is None or scaled.eps is None or base.eps == 0.0:
        raise ValueError(f"critical polarization undefined at M={M}, N={N} or M={big_M}, N={big_N}")
    ratio = scaled.eps / base.eps
    if corrected:
        ratio /= normal_quantile_correction(base.target, scaled.target)
    return ratio


def _row(args: tuple[ProblemSpec, int, float, SolverConfig]) -> SweepRow | None:
    problem, M, p_target, config = args
    try:
        result = critical_polarizations(M, problem, config=config)
    except (ConvergenceError, ValueError) as exc:
        log.warning("skipping N=%d M=%d: %s", problem.N, M, exc)
        return None
    return SweepRow(
        problem.N,
        M,
        problem.q,
        p_target,
        result.eps_necc,
        result.eps_suff,
        result.necc.width if result.eps_necc is not None else None,
        result.suff.width if result.eps_suff is not None else None,
    )


def _run_rows(tasks: list, workers: int | None) -> list[SweepRow]:
    workers = resolve_workers(workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    return [r for r in rows if r is not None]


def sweep_fixed_success(
    p_target: float,
    N_list: Iterable[int],
    config: SolverConfig = DEFAULT_SOLVER,
    workers: int | None = None,
) -> list[SweepRow]:
    """Critical polarizations at ``M = ceil(ceil(p N)/q)`` for each ``N`` (typical scenario).

    ``M`` is the ensemble size using the same oracle budget as a classical
    search that succeeds with probability ``p_target``.
    """
    if not (0.0 < p_target < 1.0):
        raise ValueError(f"p_target must lie in (0, 1), got {p_target}")
    p = Fraction(repr(p_target))
    tasks = []
    for N in sorted({int(N) for N in N_list}):
        problem = ProblemSpec(N, Scenario.TYPICAL)
        Q = math.ceil(p * N)
        M = max(1, -(-Q // problem.q))
        tasks.append((problem, M, p_target, config))
    return _run_rows(tasks, workers)


def sweep_ensemble_sizes(
    N: int | ProblemSpec,
    M_values: Iterable[int],
    config: SolverConfig = DEFAULT_SOLVER,
    workers: int | None = None,
) -> list[SweepRow]:
    """Critical polarizations over ensemble sizes at fixed ``N``.

    ``p_target`` is reported as the matched classical success probability ``qM/N``.
    """
    problem = _as_problem(N)
    tasks = [
        (problem, int(M), min(1.0, problem.q * int(M) / problem.N), config)
        for M in sorted({int(M) for M in M_values})
    ]
    return _run_rows(tasks, workers)


def loglog_fit(rows: Sequence[SweepRow], column: str) -> FitResult:
    """Least-squares line ``log10(eps) = intercept + slope log10(N)``."""
    if column not in ("eps_necc", "eps_suff"):
        raise ValueError(f"unknown column {column!r}")
    if len(rows) < 3:
        raise ValueError(f"a fit needs at least 3 rows, got {len(rows)}")
    x = np.array([math.log10(r.N) for r in rows])
    values = [getattr(r, column) for r in rows]
    if any(v is None or not v > 0 for v in values):
        raise ValueError(f"column {column} must be positive in every row")
    y = np.log10(np.array(values, dtype=float))
    if np.ptp(x) == 0.0:
        raise ValueError("all rows share the same N; the fit is degenerate")
    design = np.column_stack([np.ones_like(x), x])
    (intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((y - (intercept + slope * x)) ** 2))
    return FitResult(column, float(slope), float(intercept), rss, len(rows))
