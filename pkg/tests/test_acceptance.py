"""Acceptance gate: every criterion of the build is exercised here at its
stated tolerance, one test per criterion, each printing a PASS line with the
measured numbers (run with ``pytest -s tests/test_acceptance.py`` to see
them)."""

import math
import time

import numpy as np
import pytest

from conftest import enumerate_passive
from rcdistill.analytic import FidelityPoint, ProtocolParams, passive_performance
from rcdistill.markov import (
    evolve,
    finite_depth_performance,
    initial_weight_distribution,
    stationary_distribution,
    transition_matrix,
)
from rcdistill.mc_oracle import estimate_active, estimate_finite_depth, estimate_passive
from rcdistill.pauli_dist import gate_noise_amplitude_damping, gate_noise_depolarizing
from rcdistill.planner import guaranteed_overhead, plan_concatenation, simulate_budget_restart
from rcdistill.repeater import RepeaterPlan, evaluate_scheme, heuristic_search, largest_feasible_levels


def report(number: int, message: str):
    print(f"\nPASS criterion {number:2d}: {message}")


def test_criterion_01_exhaustive_oracle_equivalence():
    start = time.time()
    worst = 0.0
    for n in (2, 3):
        for m in range(1, n):
            for f in (0.5, 0.8, 0.95):
                closed = passive_performance(ProtocolParams(n, m), f)
                p_accept, p_joint = enumerate_passive(n, m, f)
                worst = max(worst, abs(closed.p_accept - p_accept), abs(closed.p_accept_and_phi - p_joint))
    elapsed = time.time() - start
    assert worst <= 1e-12
    assert elapsed < 1.0
    report(1, f"closed forms match 4^n enumeration, worst |diff| = {worst:.2e} in {elapsed:.3f}s")


def test_criterion_02_mc_matches_closed_form_passive():
    grid = [
        (2, 1, 0.2), (3, 1, 0.1), (3, 2, 0.2), (4, 2, 0.1),
        (5, 2, 0.15), (6, 3, 0.1), (7, 3, 0.05), (8, 4, 0.1),
        (9, 3, 0.1), (10, 5, 0.1), (11, 4, 0.05), (12, 6, 0.1),
    ]
    start = time.time()
    worst_z = 0.0
    for index, (n, m, epsilon) in enumerate(grid):
        closed = passive_performance(ProtocolParams(n, m), FidelityPoint.from_infidelity(epsilon))
        accept, joint = estimate_passive(n, m, epsilon, 1_000_000, seed=1000 + index)
        for estimate, value in ((accept, closed.p_accept), (joint, closed.p_accept_and_phi)):
            z = abs(estimate.p_hat - value) / max(estimate.stderr, 1e-12)
            worst_z = max(worst_z, z)
            assert z <= 4.0, f"(n={n}, m={m}, eps={epsilon}): z={z:.2f}"
    elapsed = time.time() - start
    assert elapsed < 120.0
    report(2, f"12-point grid at 1e6 trials within 4 stderr (worst z = {worst_z:.2f}) in {elapsed:.1f}s")


def test_criterion_03_mc_within_active_bounds():
    start = time.time()
    q = 0.9**10 + 30 * 0.9**9 * (0.1 / 3.0)  # weight-class arithmetic
    accept, joint = estimate_active(10, 5, 30, 0.1, 100_000, seed=33)
    upper = q + 2.0**-5 * 31 * (1.0 - q)
    assert accept.p_hat >= q - 4.0 * accept.stderr
    assert accept.p_hat <= upper + 4.0 * accept.stderr
    fidelity_bound = 1.0 - 2.0**-5 * 31 * (1.0 / q - 1.0)
    block = joint.p_hat / accept.p_hat
    propagated = (joint.stderr + accept.stderr) / accept.p_hat
    assert block >= fidelity_bound - 4.0 * propagated
    elapsed = time.time() - start
    assert elapsed < 120.0
    report(
        3,
        f"p_hat = {accept.p_hat:.4f} in [{q:.4f}, {upper:.4f}], block fidelity "
        f"{block:.4f} >= bound {fidelity_bound:.4f} - 4 stderr, in {elapsed:.1f}s",
    )


def test_criterion_04_phase_transition():
    threshold = -math.log2(0.8)
    assert threshold == pytest.approx(0.32193, abs=1e-5)
    above = [
        passive_performance(ProtocolParams(n, math.ceil(0.40 * n)), 0.8).block_fidelity
        for n in range(10, 201, 10)
    ]
    assert all(b >= a - 1e-12 for a, b in zip(above, above[1:]))
    assert above[-1] > 0.999
    below_10 = passive_performance(ProtocolParams(10, math.floor(0.25 * 10)), 0.8).block_fidelity
    below_200 = passive_performance(ProtocolParams(200, math.floor(0.25 * 200)), 0.8).block_fidelity
    assert below_200 < below_10
    report(
        4,
        f"threshold -log2(0.8) = {threshold:.5f}; m/n = 0.40 rises to {above[-1]:.6f} at n = 200, "
        f"m/n = 0.25 falls from {below_10:.4f} to {below_200:.2e}",
    )


def test_criterion_05_transition_matrix_properties():
    noise_models = [None, gate_noise_depolarizing(1e-2), gate_noise_depolarizing(1e-3), gate_noise_amplitude_damping(1e-2)]
    worst_column = 0.0
    for n in (2, 3, 5, 10, 20, 40, 70, 100):
        for noise in noise_models:
            sums = transition_matrix(n, noise).entries.sum(axis=0)
            worst_column = max(worst_column, float(np.abs(sums - 1.0).max()))
    assert worst_column <= 1e-12
    worst_fixed = 0.0
    for n in (2, 3, 5, 10, 20, 35, 50):
        dist = stationary_distribution(n)
        image = transition_matrix(n).entries @ dist.probs
        worst_fixed = max(worst_fixed, float(np.abs(image - dist.probs).max()))
    assert worst_fixed <= 1e-10
    report(5, f"column sums off by at most {worst_column:.2e}; stationary fixed point off by {worst_fixed:.2e}")


def test_criterion_06_full_twirl_limit():
    worst = 0.0
    for n in (5, 10, 30):
        matrix = transition_matrix(n)
        for epsilon in (0.02, 0.1):
            dist = evolve(initial_weight_distribution(n, epsilon), matrix, 10_000)
            for m in (1, n // 2):
                chain = finite_depth_performance(dist, m)
                closed = passive_performance(ProtocolParams(n, m), FidelityPoint.from_infidelity(epsilon))
                worst = max(worst, abs(chain.pair_infidelity - closed.pair_infidelity))
    assert worst <= 1e-6
    report(6, f"ideal chain at G = 1e4 matches closed-form pair infidelity within {worst:.2e}")


def test_criterion_07_finite_depth_noise_floor():
    n, epsilon = 30, 0.02
    start = initial_weight_distribution(n, epsilon)
    ladder = [300, 1000, 3000, 10000]

    def best_pair_infidelity(dist):
        return min(finite_depth_performance(dist, m).pair_infidelity for m in range(1, n))

    clean_matrix = transition_matrix(n)
    clean = {g: best_pair_infidelity(evolve(start, clean_matrix, g)) for g in ladder}
    # noiseless large-G curve agrees with the closed form at the same best m
    dist_big = evolve(start, clean_matrix, 10_000)
    m_best = min(range(1, n), key=lambda m: finite_depth_performance(dist_big, m).pair_infidelity)
    closed = passive_performance(ProtocolParams(n, m_best), FidelityPoint.from_infidelity(epsilon))
    assert finite_depth_performance(dist_big, m_best).pair_infidelity == pytest.approx(
        closed.pair_infidelity, abs=1e-6
    )
    plateaus = {}
    for lam in (1e-3, 1e-4):
        matrix = transition_matrix(n, gate_noise_depolarizing(lam))
        curve = {g: best_pair_infidelity(evolve(start, matrix, g)) for g in ladder}
        plateau = min(curve.values())
        plateaus[lam] = plateau
        assert lam / 10.0 <= plateau <= 10.0 * lam
        for g in ladder:
            assert curve[g] > clean[g]
    # MC spot check of the chain prediction at one noisy point
    gates, lam, trials = 1000, 1e-3, 100_000
    predicted = finite_depth_performance(
        evolve(start, transition_matrix(n, gate_noise_depolarizing(lam)), gates), n - 1
    )
    accept, joint, _ = estimate_finite_depth(n, n - 1, gates, epsilon, trials, seed=404, depolarizing_strength=lam)
    assert abs(accept.p_hat - predicted.p_accept) <= 4.0 * accept.stderr
    assert abs(joint.p_hat - predicted.p_accept_and_phi) <= 4.0 * joint.stderr
    report(
        7,
        f"noise floors: {plateaus[1e-3]:.2e} at lam = 1e-3, {plateaus[1e-4]:.2e} at lam = 1e-4 "
        f"(both within 10x of lam, above the clean curve); MC spot check within 4 stderr",
    )


def test_criterion_08_headline_overhead():
    start = time.time()
    active = plan_concatenation(0.1, 1e-12, active_budget_max=3_000_000)
    assert active.final_infidelity <= 1e-12
    assert active.expected_overhead <= 8.0
    passive = plan_concatenation(0.1, 1e-12)
    assert passive.final_infidelity <= 1e-12
    assert passive.expected_overhead > active.expected_overhead
    elapsed = time.time() - start
    assert elapsed < 60.0
    report(
        8,
        f"active-first-layer plan costs {active.expected_overhead:.3f} <= 8 "
        f"(passive-only {passive.expected_overhead:.3f} is strictly larger) in {elapsed:.1f}s",
    )


def test_criterion_09_auto_parameter_guarantee():
    from rcdistill.planner import auto_params

    values = {}
    for epsilon in (1e-3, 1e-4):
        target = 2.0 ** (-(epsilon ** (-1.0 / 3.0)))
        params = auto_params(epsilon, target)
        overhead = passive_performance(params, FidelityPoint.from_infidelity(epsilon)).expected_overhead
        bound = math.exp(2.0 * epsilon ** (1.0 / 6.0))
        assert overhead <= bound
        values[epsilon] = (overhead, bound)
    report(
        9,
        "exact overheads "
        + ", ".join(f"{values[e][0]:.4f} <= {values[e][1]:.4f} (eps = {e:g})" for e in values),
    )


def test_criterion_10_recipe_resources():
    plan = plan_concatenation(0.0006, 1e-12, delta=0.5, strategy="recipe")
    assert plan.final_infidelity <= 1e-12
    assert plan.expected_overhead <= 205.5
    assert plan.guaranteed_overhead <= 411.0 * math.log2(1.0 / 0.5)
    assert plan.layer_count <= 10
    assert plan.peak_memory_pairs <= 252
    report(
        10,
        f"recipe: overhead {plan.expected_overhead:.3f} <= 205.5, {plan.layer_count} layers, "
        f"peak memory {plan.peak_memory_pairs} <= 252 pairs",
    )


def test_criterion_11_retry_bound():
    plan = plan_concatenation(0.01, 1e-5, grid_nodes=3)  # two grid hops: a two-layer plan
    assert plan.layer_count == 2
    totals, succeeded = simulate_budget_restart(plan, 0.1, 10_000, seed=11)
    exceeded = ~succeeded | (totals > guaranteed_overhead(plan.expected_overhead, 0.1))
    fraction = float(exceeded.mean())
    assert fraction <= 0.1
    report(11, f"two-layer plan: {fraction:.4f} of 1e4 budget-restart runs exceed the guarantee (<= 0.1)")


def test_criterion_12_repeater_triple():
    start = time.time()
    first = ProtocolParams(n=93, m=25)  # 93 -> 68
    maintenance = ProtocolParams(n=40, m=1)
    levels = largest_feasible_levels(0.0035, 1e-9, first, maintenance, levels_cap=9)
    assert 1 <= levels <= 9
    per_level = [None, first] + [maintenance] * (levels - 1)
    reference = evaluate_scheme(RepeaterPlan(levels=levels, link_infidelity=0.0035, per_level=tuple(per_level)))
    assert reference.end_to_end_infidelity <= 1e-9
    n, k, n_prime, plan = heuristic_search(0.0035, 1e-9, n_cap=100, levels=levels)
    found = evaluate_scheme(plan)
    assert found.end_to_end_infidelity <= 1e-9
    assert found.end_to_end_overhead <= 1.05 * reference.end_to_end_overhead
    elapsed = time.time() - start
    assert elapsed < 120.0
    report(
        12,
        f"(93, 68, 40) feasible up to T = {levels}; search returns (n={n}, k={k}, n'={n_prime}) at "
        f"{found.end_to_end_overhead / reference.end_to_end_overhead:.3f}x its overhead in {elapsed:.1f}s",
    )
