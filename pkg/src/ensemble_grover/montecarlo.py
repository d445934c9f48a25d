"""Monte Carlo simulation of the ensemble readout.

Each member is measured in the computational basis of the pseudopure final
state. That state has only two distinct outcome probabilities: the marked
item ``s`` and every other item share ``(1 - eps)/N`` from the identity part,
plus ``eps alpha^2`` and ``eps beta^2/(N-1)`` respectively. A draw is
therefore "marked with probability ``p_marked``, otherwise uniform over the
other ``N - 1`` items", which never touches the ``2^n`` amplitudes.

The marked item is fixed to all ones (``s = N - 1``); qubit ``j`` (1-based)
is bit ``j - 1`` of the outcome.

Trials are grouped in blocks whose size depends only on ``M``; block ``b``
draws from a Philox stream keyed by ``(seed, b)``. Results are therefore
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grover import amplitudes, effective_polarization, is_power_of_two, qubit_count
from .parallel import resolve_workers

__all__ = [
    "OutcomeModel",
    "TrialStats",
    "make_rng",
    "sample_member",
    "sample_members",
    "run_protocol",
    "estimate_failures",
    "binomial_sigma",
    "comparison_sigma",
]


@dataclass(frozen=True)
class OutcomeModel:
    N: int
    q: int
    eps: float
    n: int = field(init=False)
    p_marked: float = field(init=False)
    p_other_each: float = field(init=False)

    def __post_init__(self) -> None:
        if not is_power_of_two(self.N) or self.N < 2:
            raise ValueError(f"sampling needs N = 2^n with n >= 1, got {self.N}")
        if self.N > 2**62:
            raise ValueError("N above 2^62 does not fit the int64 sampler")
        if not (0.0 <= self.eps <= 1.0):
            raise ValueError(f"polarization must lie in [0, 1], got {self.eps}")
        alpha, beta = amplitudes(self.N, self.q)
        background = (1.0 - self.eps) / self.N
        object.__setattr__(self, "n", qubit_count(self.N))
        object.__setattr__(self, "p_marked", background + self.eps * alpha * alpha)
        object.__setattr__(self, "p_other_each", background + self.eps * beta * beta / (self.N - 1))

    @property
    def marked(self) -> int:
        return self.N - 1

    @property
    def eps_eff(self) -> float:
        return effective_polarization(self.eps, self.N, self.q)

    def cell_probabilities(self) -> np.ndarray:
        """Full outcome distribution; only for small ``N``."""
        if self.N > 2**20:
            raise ValueError("refusing to enumerate more than 2^20 outcomes")
        probs = np.full(self.N, self.p_other_each)
        probs[self.marked] = self.p_marked
        return probs


@dataclass(frozen=True)
class TrialStats:
    trials: int
    per_bit_failures: tuple[int, ...]
    all_bit_failures: int
    seed: int
    M: int

    @property
    def per_bit_rates(self) -> np.ndarray:
        return np.asarray(self.per_bit_failures, dtype=float) / self.trials

    @property
    def per_bit_rate(self) -> float:
        """Failure frequency pooled over qubits."""
        return sum(self.per_bit_failures) / (len(self.per_bit_failures) * self.trials)

    @property
    def all_bit_rate(self) -> float:
        return self.all_bit_failures / self.trials


def binomial_sigma(rate: float, trials: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / trials)


def comparison_sigma(rate: float, trials: int) -> float:
    """Standard error for empirical-vs-analytic checks, floored at one count.

    Without the floor a rate of exactly 0 (or 1) would demand exact agreement
    with an analytic value that may be ``1e-20`` rather than zero.
    """
    return max(binomial_sigma(rate, trials), 1.0 / trials)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``stream`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_members(model: OutcomeModel, size, rng: np.random.Generator) -> np.ndarray:
    """Integer measurement outcomes for ``size`` members."""
    marked = rng.random(size) < model.p_marked
    others = rng.integers(0, model.N - 1, size=size, dtype=np.int64)
    return np.where(marked, np.int64(model.marked), others)


def _bits(outcomes: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n, dtype=np.int64)
    return (outcomes[..., None] >> shifts) & 1


def sample_member(model: OutcomeModel, rng: np.random.Generator) -> np.ndarray:
    """One member's outcome as bits ``[qubit 1, ..., qubit n]``."""
    return _bits(sample_members(model, 1, rng), model.n)[0]


def _vote(ones: np.ndarray, M: int, coins: np.ndarray) -> np.ndarray:
    """Candidate bits from per-qubit counts of outcome 1; exact ties take the coin."""
    return np.where(2 * ones > M, 1, np.where(2 * ones < M, 0, coins))


def run_protocol(model: OutcomeModel, M: int, rng: np.random.Generator) -> np.ndarray:
    """Bitwise majority vote over ``M`` members; returns the candidate bits."""
    if M < 1:
        raise ValueError(f"ensemble size must be >= 1, got {M}")
    ones = _bits(sample_members(model, M, rng), model.n).sum(axis=0)
    coins = (rng.random(model.n) < 0.5).astype(np.int64)
    return _vote(ones, M, coins)


def _block_size(M: int) -> int:
    return max(1, min(1 << 14, (1 << 22) // M))


def _run_block(args: tuple[OutcomeModel, int, int, int, int]) -> tuple[np.ndarray, int]:
    model, M, rows, seed, block = args
    rng = make_rng(seed, block)
    outcomes = sample_members(model, (rows, M), rng)
    coins = (rng.random((rows, model.n)) < 0.5).astype(np.int64)
    ones = np.empty((rows, model.n), dtype=np.int64)
    for j in range(model.n):
        ones[:, j] = ((outcomes >> j) & 1).sum(axis=1)
    failed = _vote(ones, M, coins) != 1
    return failed.sum(axis=0), int(failed.any(axis=1).sum())


def estimate_failures(
    model: OutcomeModel, M: int, trials: int, seed: int, workers: int | None = None
) -> TrialStats:
    """Repeat the vote ``trials`` times and tally per-bit and all-bit failures."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if M < 1:
        raise ValueError(f"ensemble size must be >= 1, got {M}")
    size = _block_size(M)
    tasks = []
    done = 0
    block = 0
    while done < trials:
        rows = min(size, trials - done)
        tasks.append((model, M, rows, seed, block))
        done += rows
        block += 1
    workers = resolve_workers(workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            parts = list(pool.map(_run_block, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        parts = [_run_block(t) for t in tasks]
    per_bit = np.zeros(model.n, dtype=np.int64)
    all_bit = 0
    for bits, total in parts:
        per_bit += bits
        all_bit += total
    return TrialStats(trials, tuple(int(c) for c in per_bit), all_bit, seed, M)
