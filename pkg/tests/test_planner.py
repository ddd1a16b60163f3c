import math

import numpy as np
import pytest

from rcdistill.analytic import EXACT, GUARANTEED_BOUND, FidelityPoint, ProtocolParams, passive_performance
from rcdistill.errors import InfeasibleError
from rcdistill.pauli_dist import IIDDepolarizing, active_bounds
from rcdistill.planner import (
    ConcatenationPlan,
    PlanLayer,
    auto_params,
    guaranteed_overhead,
    plan_concatenation,
    simulate_budget_restart,
    simulate_retries,
)


class TestAutoParams:
    def test_reference_point(self):
        params = auto_params(1e-4, 2.0**-21)
        assert (params.n, params.m, params.k) == (100, 21, 79)

    def test_no_output_pair_left(self):
        with pytest.raises(InfeasibleError):
            auto_params(0.04, 0.01)

    def test_overhead_stays_below_guarantee(self):
        params = auto_params(1e-3, 2.0**-9)
        report = passive_performance(params, FidelityPoint.from_infidelity(1e-3))
        assert report.expected_overhead <= math.exp(2.0 * 1e-3 ** (1.0 / 6.0))

    @pytest.mark.parametrize("epsilon", [1e-3, 1e-4])
    def test_guarantee_at_recipe_target(self, epsilon):
        target = 2.0 ** (-(epsilon ** (-1.0 / 3.0)))
        params = auto_params(epsilon, target)
        report = passive_performance(params, FidelityPoint.from_infidelity(epsilon))
        assert report.expected_overhead <= math.exp(2.0 * epsilon ** (1.0 / 6.0))
        assert report.pair_infidelity <= target

    def test_domain(self):
        with pytest.raises(ValueError):
            auto_params(0.06, 0.01)
        with pytest.raises(ValueError):
            auto_params(1e-4, 2.0**-60)  # beyond the per-round reach


class TestGuaranteedOverhead:
    def test_half(self):
        assert guaranteed_overhead(3.0, 0.5) == pytest.approx(6.0, abs=1e-12)

    def test_small_delta(self):
        assert guaranteed_overhead(3.0, 0.01) == pytest.approx(6.0 * math.log2(100.0), rel=1e-12)

    def test_quarter(self):
        assert guaranteed_overhead(1.0, 0.25) == pytest.approx(4.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            guaranteed_overhead(0.5, 0.1)
        with pytest.raises(ValueError):
            guaranteed_overhead(2.0, 0.0)


def recompute_chain(plan: ConcatenationPlan):
    """Feasibility oracle: re-evaluate every layer fresh at its assumed input,
    checking the chaining contract as we go."""
    overhead = 1.0
    for index, layer in enumerate(plan.layers):
        params = layer.params
        if params.is_passive and layer.accounting == EXACT:
            report = passive_performance(params, FidelityPoint.from_infidelity(layer.input_infidelity))
            out, p_accept = report.pair_infidelity, report.p_accept
        elif params.is_passive:
            fn = (1.0 - layer.input_infidelity) ** params.n
            block = 2.0**-params.m * (1.0 / fn - 1.0)
            out = 1.0 - (1.0 - block) ** (1.0 / params.k)
            p_accept = fn
        else:
            report = active_bounds(params, IIDDepolarizing(n=params.n, epsilon=layer.input_infidelity))
            out = 1.0 - report.fidelity_lower_bound ** (1.0 / params.k)
            p_accept = report.p_accept_lower
        assert out == pytest.approx(layer.output_infidelity, rel=1e-9)
        assert p_accept == pytest.approx(layer.p_accept, rel=1e-9)
        if index + 1 < len(plan.layers):
            assert layer.output_infidelity <= plan.layers[index + 1].input_infidelity * (1.0 + 1e-12)
        overhead *= params.n / (params.k * p_accept)
    return overhead


class TestPlanConcatenation:
    def test_degenerate_zero_layer(self):
        target = 1e-3
        plan = plan_concatenation(target * 1.0001, target)
        assert plan.layer_count == 0
        assert plan.expected_overhead == 1.0
        assert plan.peak_memory_pairs == 0

    def test_dp_plan_is_feasible(self):
        plan = plan_concatenation(0.01, 1e-9, grid_nodes=128)
        assert plan.final_infidelity <= 1e-9
        overhead = recompute_chain(plan)
        assert overhead == pytest.approx(plan.expected_overhead, rel=1e-9)
        assert plan.guaranteed_overhead == pytest.approx(2.0 * plan.expected_overhead * math.log2(100.0), rel=1e-12)

    def test_active_first_layer_only(self):
        plan = plan_concatenation(0.05, 1e-9, active_budget_max=10_000, grid_nodes=128)
        assert not plan.layers[0].params.is_passive
        assert all(layer.params.is_passive for layer in plan.layers[1:])
        assert plan.layers[0].params.budget + 1 <= 2 ** plan.layers[0].params.m
        assert plan.final_infidelity <= 1e-9
        recompute_chain(plan)

    def test_search_is_deterministic(self):
        first = plan_concatenation(0.03, 1e-8, active_budget_max=5000, grid_nodes=128)
        second = plan_concatenation(0.03, 1e-8, active_budget_max=5000, grid_nodes=128)
        assert first == second

    def test_monotone_in_target(self):
        overheads = [
            plan_concatenation(0.01, target, grid_nodes=128).expected_overhead
            for target in (1e-6, 1e-9, 1e-12)
        ]
        assert overheads[0] <= overheads[1] + 1e-12
        assert overheads[1] <= overheads[2] + 1e-12

    def test_bound_objective_dominates_exact(self):
        exact = plan_concatenation(0.01, 1e-9, objective="exact", grid_nodes=128)
        # re-scoring the same layers with guaranteed values can only grow
        for layer in exact.layers:
            fn = (1.0 - layer.input_infidelity) ** layer.params.n
            assert layer.params.n / (layer.params.k * fn) >= layer.expected_overhead - 1e-12
        bound = plan_concatenation(0.01, 1e-9, objective="bound", grid_nodes=128)
        assert bound.expected_overhead >= exact.expected_overhead - 1e-12
        recompute_chain(bound)

    def test_infeasible_cap(self):
        with pytest.raises(InfeasibleError):
            plan_concatenation(0.4, 1e-9, n_max=3, grid_nodes=64)

    def test_domain(self):
        with pytest.raises(ValueError):
            plan_concatenation(0.6, 1e-9)
        with pytest.raises(ValueError):
            plan_concatenation(0.01, 1e-9, objective="best")
        with pytest.raises(ValueError):
            plan_concatenation(0.01, 1e-9, strategy="greedy")


class TestRecipeStrategy:
    def test_reference_schedule(self):
        plan = plan_concatenation(0.0006, 1e-12, delta=0.5, strategy="recipe")
        assert plan.layer_count <= 10
        assert plan.expected_overhead <= 205.5
        assert plan.guaranteed_overhead <= 411.0
        assert plan.peak_memory_pairs <= 252
        assert plan.final_infidelity <= 1e-12
        recompute_chain(plan)

    def test_layer_guarantee_factors_decay(self):
        plan = plan_concatenation(0.0006, 1e-12, strategy="recipe")
        factors = [math.exp(2.0 * layer.input_infidelity ** (1.0 / 6.0)) for layer in plan.layers]
        assert all(b < a for a, b in zip(factors, factors[1:]))
        for layer, factor in zip(plan.layers, factors):
            assert layer.expected_overhead <= factor

    def test_requires_small_start(self):
        with pytest.raises(ValueError):
            plan_concatenation(0.01, 1e-12, strategy="recipe")


def synthetic_plan(p_accepts, shapes, delta=0.1) -> ConcatenationPlan:
    layers = []
    eps = 0.01
    for p_accept, (n, m) in zip(p_accepts, shapes):
        layers.append(
            PlanLayer(
                params=ProtocolParams(n=n, m=m),
                input_infidelity=eps,
                output_infidelity=eps / 10.0,
                p_accept=p_accept,
                expected_overhead=n / ((n - m) * p_accept),
                accounting=GUARANTEED_BOUND,
            )
        )
        eps /= 10.0
    expected = math.prod(layer.expected_overhead for layer in layers)
    return ConcatenationPlan(
        layers=tuple(layers),
        final_infidelity=eps,
        expected_overhead=expected,
        delta=delta,
        guaranteed_overhead=guaranteed_overhead(expected, delta),
    )


class TestRetrySimulation:
    def test_certain_acceptance_is_deterministic(self):
        plan = synthetic_plan([1.0, 1.0], [(4, 2), (6, 3)])
        samples = simulate_retries(plan, 1000, seed=1)
        assert np.allclose(samples, (4 / 2) * (6 / 3), atol=1e-12)

    def test_sample_mean_matches_product_formula(self):
        plan = synthetic_plan([0.8, 0.6], [(5, 2), (8, 3)])
        samples = simulate_retries(plan, 100_000, seed=2)
        stderr = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(samples.mean() - plan.expected_overhead) <= 3.0 * stderr

    def test_budget_restart_failure_fraction(self):
        plan = synthetic_plan([0.8, 0.6], [(5, 2), (8, 3)], delta=0.1)
        totals, succeeded = simulate_budget_restart(plan, 0.1, 10_000, seed=3)
        exceeded = ~succeeded | (totals > guaranteed_overhead(plan.expected_overhead, 0.1))
        assert exceeded.mean() <= 0.1

    def test_real_two_layer_plan(self):
        plan = plan_concatenation(0.01, 1e-5, grid_nodes=96)
        samples = simulate_retries(plan, 50_000, seed=4)
        stderr = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(samples.mean() - plan.expected_overhead) <= 3.0 * stderr
