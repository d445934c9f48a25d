"""Closed-form quantities for single-marked-item Grover search.

After ``q`` Grover iterates the state is ``alpha|s> + beta/sqrt(N-1) sum_{x!=s}|x>``
with ``alpha = sin((2q+1) theta/2)``, ``beta = cos((2q+1) theta/2)`` and
``cos(theta) = 1 - 2/N``. An ensemble prepared in the pseudopure state
``(1-eps)/N I + eps |psi><psi|`` yields, on every qubit, the correct bit with
probability ``(1 + eps_eff)/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

__all__ = [
    "Scenario",
    "ProblemSpec",
    "GroverState",
    "EnsembleSpec",
    "nint",
    "is_power_of_two",
    "qubit_count",
    "theta",
    "q_std",
    "q_typical",
    "amplitudes",
    "grover_state",
    "effective_polarization",
    "member_correct_probability",
    "m_min",
]


class Scenario(str, enum.Enum):
    EXACT = "exact"
    TYPICAL = "typical"


def nint(x: float) -> int:
    """Nearest integer, ties rounded away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def is_power_of_two(N: int) -> bool:
    return N >= 1 and N & (N - 1) == 0


def qubit_count(N: int) -> int:
    """``ceil(log2 N)`` computed on integers."""
    if N < 1:
        raise ValueError(f"database size must be positive, got {N}")
    return (N - 1).bit_length()


def _check_size(N: int) -> None:
    if N < 2:
        raise ValueError(f"database size must be at least 2, got {N}")


def theta(N: int) -> float:
    """Grover rotation angle ``arccos(1 - 2/N)``.

    Evaluated as ``2 asin(1/sqrt(N))``, which is the same angle but keeps full
    relative precision for large ``N`` where ``1 - 2/N`` rounds badly.
    """
    _check_size(N)
    return 2.0 * math.asin(1.0 / math.sqrt(N))


def q_std(N: int) -> int:
    """Standard iteration count ``nint(pi/(2 theta) - 1/2)``."""
    return nint(math.pi / (2.0 * theta(N)) - 0.5)


def q_typical(N: int) -> int:
    """Large-``N`` iteration count ``nint(pi sqrt(N)/4)``."""
    _check_size(N)
    return nint(math.pi * math.sqrt(N) / 4.0)


def amplitudes(N: int, q: int) -> tuple[float, float]:
    """``(alpha_q, beta_q)`` after ``q`` Grover iterates."""
    if q < 0:
        raise ValueError(f"iteration count must be nonnegative, got {q}")
    _check_size(N)
    half_angle = (2 * q + 1) * math.asin(1.0 / math.sqrt(N))
    return math.sin(half_angle), math.cos(half_angle)


@dataclass(frozen=True)
class GroverState:
    theta: float
    alpha: float
    beta: float
    p_correct_conventional: float


def grover_state(N: int, q: int) -> GroverState:
    alpha, beta = amplitudes(N, q)
    return GroverState(theta(N), alpha, beta, alpha * alpha)


@dataclass(frozen=True)
class ProblemSpec:
    """Database size, scenario and per-member oracle count.

    In the exact scenario ``N`` must be a power of two and ``q`` defaults to
    ``q_std(N)``; any ``q >= 1`` may be given to model a truncated search.
    In the typical scenario ``q = nint(pi sqrt(N)/4)`` and ``eps_eff = eps``.
    """

    N: int
    scenario: Scenario = Scenario.EXACT
    q_override: int | None = None
    n: int = field(init=False)
    q: int = field(init=False)

    def __post_init__(self) -> None:
        N = self.N
        if isinstance(N, bool) or int(N) != N:
            raise ValueError(f"database size must be an integer, got {N!r}")
        N = int(N)
        object.__setattr__(self, "N", N)
        _check_size(N)
        scenario = Scenario(self.scenario)
        object.__setattr__(self, "scenario", scenario)
        if scenario is Scenario.EXACT:
            if not is_power_of_two(N):
                raise ValueError(f"exact scenario requires N = 2^n, got {N}")
            q = q_std(N) if self.q_override is None else self.q_override
        else:
            if self.q_override is not None:
                raise ValueError("typical scenario fixes q = nint(pi sqrt(N)/4); use the exact scenario to override q")
            q = q_typical(N)
        if q < 1:
            raise ValueError(f"oracle invocation count must be >= 1, got {q}")
        object.__setattr__(self, "q", int(q))
        object.__setattr__(self, "n", qubit_count(N))

    @classmethod
    def auto(cls, N: int, q: int | None = None) -> "ProblemSpec":
        """Exact scenario for powers of two, typical otherwise."""
        if is_power_of_two(int(N)):
            return cls(N, Scenario.EXACT, q)
        return cls(N, Scenario.TYPICAL, q)

    def effective_polarization(self, eps: float) -> float:
        if self.scenario is Scenario.TYPICAL:
            _check_eps(eps)
            return eps
        return effective_polarization(eps, self.N, self.q)

    def ensemble(self, M: int, eps: float) -> "EnsembleSpec":
        return EnsembleSpec(M, eps, self.effective_polarization(eps))


def _check_eps(eps: float) -> None:
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"polarization must lie in [0, 1], got {eps}")


def effective_polarization(eps: float, N: int, q: int) -> float:
    """``eps (alpha_q^2 N - 1)/(N - 1)``, the bias of every single-qubit outcome."""
    _check_eps(eps)
    alpha, _ = amplitudes(N, q)
    return eps * (alpha * alpha * N - 1.0) / (N - 1.0)


def member_correct_probability(eps_eff: float) -> float:
    """Probability that one member reports the correct value of a given bit."""
    _check_eps(eps_eff)
    return 0.5 * (1.0 + eps_eff)


def m_min(M: int) -> int:
    """Smallest winning vote count ``ceil((M+1)/2)``."""
    return (M + 2) // 2


@dataclass(frozen=True)
class EnsembleSpec:
    M: int
    eps: float
    eps_eff: float
    M_min: int = field(init=False)

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError(f"ensemble size must be >= 1, got {self.M}")
        _check_eps(self.eps)
        if not (0.0 <= self.eps_eff <= self.eps * (1.0 + 1e-12)):
            raise ValueError(f"effective polarization {self.eps_eff} outside [0, eps={self.eps}]; q overshoots the marked state")
        object.__setattr__(self, "M_min", m_min(self.M))
