"""Ensemble Grover search with a majority-vote readout.

Failure probabilities, critical polarizations against a classical sequential
search, and a Monte Carlo cross-check.
"""

from .critical import (
    CriticalResult,
    FitResult,
    SolverConfig,
    SweepRow,
    critical_polarizations,
    generalized_m_max,
    generalized_scaling_exponent,
    loglog_fit,
    m_max,
    pfail_classical,
    scaling_check,
    solve_necessary_eps,
    solve_sufficient_eps,
    sweep_ensemble_sizes,
    sweep_fixed_success,
)
from .grover import (
    EnsembleSpec,
    ProblemSpec,
    Scenario,
    amplitudes,
    effective_polarization,
    member_correct_probability,
    q_std,
    theta,
)
from .montecarlo import OutcomeModel, TrialStats, estimate_failures, run_protocol, sample_member
from .special import ConvergenceError, regularized_incomplete_beta
from .stats import (
    FailureProbabilityRequest,
    Method,
    joint_prob_two_qubit,
    pfail_all_bounds,
    pfail_one,
    pfail_one_beta,
    pfail_one_eps1_bound,
    pfail_one_exact,
    pfail_one_gauss,
    psall_two_qubit,
)

__version__ = "0.1.0"
