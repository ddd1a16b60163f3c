"""Toolkit for random bilocal Clifford entanglement distillation: exact
performance formulas, guaranteed bounds for syndrome decoding, finite-depth
weight chains, Monte Carlo validation, concatenation planning and nested
repeater evaluation."""

__version__ = "0.1.0"

from .analytic import (
    FidelityPoint,
    PerformanceReport,
    ProtocolParams,
    SyndromeRelation,
    expected_overhead,
    improvement_threshold,
    passive_performance,
    syndrome_match_probability,
    twirl_weights,
)
from .errors import InfeasibleError
from .markov import (
    TransitionMatrix,
    WeightDistribution,
    evolve,
    finite_depth_performance,
    initial_weight_distribution,
    stationary_distribution,
    transition_matrix,
)
from .mc_oracle import (
    MCEstimate,
    PauliFrame,
    SymplecticClifford,
    conjugate,
    estimate_active,
    estimate_finite_depth,
    estimate_passive,
    sample_clifford,
)
from .pauli_dist import (
    ActiveReport,
    GateNoise,
    IIDDepolarizing,
    active_bounds,
    enumerate_top_errors,
    gate_noise_amplitude_damping,
    gate_noise_depolarizing,
    top_error_mass,
)
from .planner import (
    ConcatenationPlan,
    PlanLayer,
    auto_params,
    guaranteed_overhead,
    plan_concatenation,
    simulate_budget_restart,
    simulate_retries,
)
from .repeater import (
    RepeaterPlan,
    SchemeReport,
    evaluate_scheme,
    heuristic_search,
    largest_feasible_levels,
    swap_propagate,
)
