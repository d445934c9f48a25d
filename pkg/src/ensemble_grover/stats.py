"""Failure and success probabilities of the bitwise majority-vote readout.

A single output bit is wrong when the incorrect outcome wins the vote over
``M`` members, each member being wrong independently with probability
``p = (1 - eps_eff)/2``. Ties (even ``M``) are broken by a fair coin, which is
why the exact expression averages two binomial tails.

Three evaluations of the single-bit failure probability are provided: a
log-space binomial sum, the incomplete-beta form and the large-``M`` normal
approximation. For two qubits (``N = 4``) the correlated joint law of the
vote counts is available in closed form, which gives the all-bit success
probability exactly; for more qubits only the bounds
``p_one <= p_all <= n p_one`` are available.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grover import _check_eps, m_min, qubit_count
from .special import log_regularized_incomplete_beta, normal_sf

__all__ = [
    "Method",
    "DispatchThresholds",
    "DEFAULT_THRESHOLDS",
    "EXACT_MAX_M",
    "TWO_QUBIT_MAX_M",
    "FailureProbabilityRequest",
    "FailureProbability",
    "log_binomial_tail",
    "pfail_one_exact",
    "log_pfail_one_exact",
    "pfail_one_beta",
    "log_pfail_one_beta",
    "pfail_one_gauss",
    "pfail_one",
    "failure_probability",
    "pfail_one_eps1_bound",
    "log_pfail_one_eps1_bound",
    "joint_prob_two_qubit",
    "joint_distribution_two_qubit",
    "psall_two_qubit",
    "pfail_all_bounds",
]

EXACT_MAX_M = 10_000
TWO_QUBIT_MAX_M = 500
_LN2 = math.log(2.0)


class Method(str, enum.Enum):
    EXACT_BINOMIAL = "exact"
    INCOMPLETE_BETA = "beta"
    GAUSSIAN = "gauss"
    AUTO = "auto"


@dataclass(frozen=True)
class DispatchThresholds:
    """Largest ``M`` handled by each method under ``Method.AUTO``.

    The ranges of adjacent methods overlap (exact up to 10^4, beta at any
    size), so the switch points can be moved without losing a cross-check.
    """

    exact_max: int = 2000
    beta_max: int = 10**8

    def choose(self, M: int) -> Method:
        if M <= self.exact_max:
            return Method.EXACT_BINOMIAL
        if M <= self.beta_max:
            return Method.INCOMPLETE_BETA
        return Method.GAUSSIAN


DEFAULT_THRESHOLDS = DispatchThresholds()


def _check_m(M: int) -> None:
    if M < 1:
        raise ValueError(f"ensemble size must be >= 1, got {M}")


def _log_wrong_right(eps_eff: float) -> tuple[float, float]:
    """``log((1-eps)/2)`` and ``log((1+eps)/2)``."""
    log_wrong = math.log1p(-eps_eff) - _LN2 if eps_eff < 1.0 else -math.inf
    return log_wrong, math.log1p(eps_eff) - _LN2


def _logsumexp(values: np.ndarray) -> float:
    top = float(np.max(values))
    if top == -math.inf:
        return -math.inf
    return top + math.log(float(np.sum(np.exp(values - top))))


def _at_most_half(log_value: float) -> float:
    # rounding can push the tie-free value a few ulp past 1/2 at eps_eff = 0
    return min(log_value, -_LN2)


def log_binomial_tail(M: int, k0: int, log_p: float, log_q: float) -> float:
    """``log sum_{k=k0}^{M} C(M,k) p^k q^(M-k)`` given ``log p`` and ``log q``.

    The first term is anchored with an exact integer binomial coefficient and
    the rest follow from the term ratio, so no large log-gamma values are
    differenced.
    """
    if k0 > M:
        return -math.inf
    k0 = max(k0, 0)
    if log_p == -math.inf:
        return 0.0 if k0 == 0 else -math.inf
    if log_q == -math.inf:
        return 0.0
    anchor = math.log(math.comb(M, k0)) + k0 * log_p + (M - k0) * log_q
    k = np.arange(k0, M, dtype=float)
    steps = np.log((M - k) / (k + 1.0)) + (log_p - log_q)
    logs = np.concatenate(([anchor], anchor + np.cumsum(steps)))
    return _logsumexp(logs)


def log_pfail_one_exact(eps_eff: float, M: int) -> float:
    _check_eps(eps_eff)
    _check_m(M)
    if M > EXACT_MAX_M:
        raise ValueError(f"exact binomial evaluation is limited to M <= {EXACT_MAX_M}, got {M}")
    log_wrong, log_right = _log_wrong_right(eps_eff)
    k_min = m_min(M)
    first = log_binomial_tail(M, k_min, log_wrong, log_right)
    if M % 2:
        return _at_most_half(first)
    second = log_binomial_tail(M, M - k_min + 1, log_wrong, log_right)
    return _at_most_half(float(np.logaddexp(first, second)) - _LN2)


def pfail_one_exact(eps_eff: float, M: int) -> float:
    """Single-bit failure probability as a pair of half-weighted binomial tails.

    >>> round(pfail_one_exact(0.2, 5), 12)
    0.31744
    """
    return math.exp(log_pfail_one_exact(eps_eff, M))


def log_pfail_one_beta(eps_eff: float, M: int) -> float:
    _check_eps(eps_eff)
    _check_m(M)
    if eps_eff == 1.0:
        return -math.inf
    p = 0.5 * (1.0 - eps_eff)
    k_min = m_min(M)
    first = log_regularized_incomplete_beta(p, k_min, M - k_min + 1)
    if M % 2:
        return _at_most_half(first)
    second = log_regularized_incomplete_beta(p, M - k_min + 1, k_min)
    return _at_most_half(float(np.logaddexp(first, second)) - _LN2)


def pfail_one_beta(eps_eff: float, M: int) -> float:
    """Single-bit failure probability through ``I_p`` with ``p = (1 - eps_eff)/2``."""
    return math.exp(log_pfail_one_beta(eps_eff, M))


def pfail_one_gauss(eps: float, M: int) -> float:
    """Normal approximation ``1/2 - (1/sqrt(2 pi)) int_0^{eps sqrt M} exp(-t^2/2) dt``."""
    _check_eps(eps)
    _check_m(M)
    return normal_sf(eps * math.sqrt(M))


@dataclass(frozen=True)
class FailureProbabilityRequest:
    eps_eff: float
    M: int
    method: Method = Method.AUTO

    def __post_init__(self) -> None:
        _check_eps(self.eps_eff)
        _check_m(self.M)
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.EXACT_BINOMIAL and self.M > EXACT_MAX_M:
            raise ValueError(f"exact binomial evaluation is limited to M <= {EXACT_MAX_M}, got {self.M}")


@dataclass(frozen=True)
class FailureProbability:
    value: float
    method: Method


_EVALUATORS = {
    Method.EXACT_BINOMIAL: pfail_one_exact,
    Method.INCOMPLETE_BETA: pfail_one_beta,
    Method.GAUSSIAN: pfail_one_gauss,
}


def pfail_one(request: FailureProbabilityRequest, thresholds: DispatchThresholds = DEFAULT_THRESHOLDS) -> FailureProbability:
    """Evaluate a single-bit failure probability, choosing the method if asked to."""
    method = request.method
    if method is Method.AUTO:
        method = thresholds.choose(request.M)
    return FailureProbability(_EVALUATORS[method](request.eps_eff, request.M), method)


def failure_probability(
    eps_eff: float, M: int, method: Method | str = Method.AUTO, thresholds: DispatchThresholds = DEFAULT_THRESHOLDS
) -> float:
    return pfail_one(FailureProbabilityRequest(eps_eff, M, Method(method)), thresholds).value


def log_pfail_one_eps1_bound(M: int, N: int) -> float:
    _check_m(M)
    if N < 3:
        raise ValueError(f"the perfect-polarization bound needs N >= 3, got {N}")
    return (
        0.5 * math.log(2.0 / (math.pi * M))
        + math.log(2.0 * (N - 1) / (2.0 * N - 3))
        + 0.5 * M * math.log(2.0 / (N - 1))
    )


def pfail_one_eps1_bound(M: int, N: int) -> float:
    """Large-``M`` upper bound on the single-bit failure probability at ``eps = 1``."""
    return math.exp(log_pfail_one_eps1_bound(M, N))


def _check_two_qubit(M: int, eps: float) -> None:
    _check_eps(eps)
    _check_m(M)
    if M > TWO_QUBIT_MAX_M:
        raise ValueError(f"two-qubit joint law is limited to M <= {TWO_QUBIT_MAX_M}, got {M}")


def _log_factorials(M: int) -> np.ndarray:
    return np.array([math.lgamma(i + 1.0) for i in range(M + 1)])


def joint_prob_two_qubit(k1: int, k2: int, M: int, eps: float) -> float:
    """Probability that qubit 1 is correct ``k1`` times and qubit 2 ``k2`` times.

    Sums the multinomial law of the four per-member cell counts
    ``(M-k1-k2+l, k1-l, k2-l, l)`` over the number ``l`` of members that got
    both bits right.
    """
    _check_two_qubit(M, eps)
    if not (0 <= k1 <= M and 0 <= k2 <= M):
        raise ValueError(f"counts must lie in [0, {M}], got k1={k1}, k2={k2}")
    log_fact = _log_factorials(M)
    log_one_minus = math.log1p(-eps) if eps < 1.0 else -math.inf
    log_one_plus3 = math.log1p(3.0 * eps)
    logs = []
    for l in range(max(0, k1 + k2 - M), min(k1, k2) + 1):
        if M - l > 0 and log_one_minus == -math.inf:
            continue
        log_multi = log_fact[M] - log_fact[M - k1 - k2 + l] - log_fact[k1 - l] - log_fact[k2 - l] - log_fact[l]
        wrong_part = (M - l) * log_one_minus if M - l else 0.0
        logs.append(log_multi + wrong_part + l * log_one_plus3)
    if not logs:
        return 0.0
    return math.exp(_logsumexp(np.array(logs)) - M * math.log(4.0))


def joint_distribution_two_qubit(M: int, eps: float) -> np.ndarray:
    """Table ``P[k1, k2]`` of the joint correct-count law for ``N = 4``."""
    _check_two_qubit(M, eps)
    log_fact = _log_factorials(M)
    k1, k2 = np.meshgrid(np.arange(M + 1), np.arange(M + 1), indexing="ij")
    acc = np.full((M + 1, M + 1), -np.inf)
    log_one_minus = math.log1p(-eps) if eps < 1.0 else -math.inf
    log_one_plus3 = math.log1p(3.0 * eps)
    with np.errstate(invalid="ignore"):
        for l in range(M + 1):
            if M - l > 0 and log_one_minus == -math.inf:
                continue
            valid = (l >= np.maximum(0, k1 + k2 - M)) & (l <= np.minimum(k1, k2))
            if not valid.any():
                continue
            i0 = np.where(valid, M - k1 - k2 + l, 0)
            i1 = np.where(valid, k1 - l, 0)
            i2 = np.where(valid, k2 - l, 0)
            log_multi = log_fact[M] - log_fact[i0] - log_fact[i1] - log_fact[i2] - log_fact[l]
            wrong_part = (M - l) * log_one_minus if M - l else 0.0
            term = np.where(valid, log_multi + wrong_part + l * log_one_plus3, -np.inf)
            acc = np.logaddexp(acc, term)
    return np.exp(acc - M * math.log(4.0))


def psall_two_qubit(eps: float, M: int) -> float:
    """Probability that the vote recovers both bits of a two-qubit search, odd ``M``."""
    if M % 2 == 0:
        raise ValueError(f"the two-qubit success probability is defined for odd M only, got {M}")
    table = joint_distribution_two_qubit(M, eps)
    half = (M + 1) // 2
    return math.fsum(table[half:, half:].ravel())


def pfail_all_bounds(
    eps_eff: float, M: int, N: int, method: Method | str = Method.AUTO
) -> tuple[float, float]:
    """``(p_one, min(1, n p_one))`` bracketing the all-bit failure probability."""
    lower = failure_probability(eps_eff, M, method)
    return lower, min(1.0, qubit_count(N) * lower)
