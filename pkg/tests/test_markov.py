import math

import numpy as np
import pytest

from rcdistill.analytic import FidelityPoint, ProtocolParams, passive_performance
from rcdistill.markov import (
    WeightDistribution,
    evolve,
    finite_depth_performance,
    initial_weight_distribution,
    stationary_distribution,
    transition_matrix,
)
from rcdistill.mc_oracle import group_element_indices
from rcdistill.pauli_dist import GateNoise, gate_noise_amplitude_damping, gate_noise_depolarizing

NOISE_SET = [
    None,
    gate_noise_depolarizing(1e-2),
    gate_noise_depolarizing(1e-3),
    gate_noise_amplitude_damping(1e-2),
]


class TestTransitionMatrix:
    def test_ideal_two_pairs(self):
        entries = transition_matrix(2).entries
        assert np.allclose(entries[:, 0], [1.0, 0.0, 0.0], atol=1e-15)
        assert np.allclose(entries[:, 1], [0.0, 0.4, 0.6], atol=1e-15)
        assert np.allclose(entries[:, 2], [0.0, 0.4, 0.6], atol=1e-15)

    def test_noisy_clean_column(self):
        noise = gate_noise_depolarizing(0.01)
        entries = transition_matrix(2, noise).entries
        assert entries[0, 0] == pytest.approx(noise.f0, rel=1e-12)
        assert entries[1, 0] == pytest.approx(0.4 * (1.0 - noise.f0), rel=1e-12)
        assert entries[2, 0] == pytest.approx(0.6 * (1.0 - noise.f0), rel=1e-12)

    def test_ideal_gate_noise_reduces_to_noiseless(self):
        ideal = transition_matrix(7).entries
        explicit = transition_matrix(7, GateNoise(1.0, 0.0, 0.0)).entries
        assert np.array_equal(ideal, explicit)

    def test_exhaustive_group_average(self):
        # catalog all 720 two-pair group elements via their sampled
        # fingerprints, then average the weight transition of every
        # non-identity pattern (starting weight 1 or 2) over the whole group
        indices = np.unique(group_element_indices(2, 60000, 4242))
        assert indices.size == 720

        def pattern_weight(packed: int) -> int:
            return ((packed | packed >> 1) & 1) + (((packed >> 2) | (packed >> 3)) & 1)

        columns = np.zeros((3, 3))
        class_size = np.zeros(3)
        for packed in range(1, 16):
            class_size[pattern_weight(packed)] += 1.0
        for fingerprint in indices:
            rows = [(int(fingerprint) >> (4 * j)) & 0xF for j in range(4)]
            for packed in range(1, 16):
                image = 0
                for j in range(4):
                    if (packed >> j) & 1:
                        image ^= rows[j]
                w_in = pattern_weight(packed)
                columns[pattern_weight(image), w_in] += 1.0 / (720.0 * class_size[w_in])
        expected = transition_matrix(2).entries
        assert np.allclose(columns[:, 1], expected[:, 1], atol=1e-12)
        assert np.allclose(columns[:, 2], expected[:, 2], atol=1e-12)

    @pytest.mark.parametrize("noise", NOISE_SET)
    @pytest.mark.parametrize("n", [2, 3, 5, 10, 30, 60, 100])
    def test_column_stochastic(self, n, noise):
        entries = transition_matrix(n, noise).entries
        assert np.all(entries >= 0.0)
        assert np.allclose(entries.sum(axis=0), 1.0, atol=1e-12)

    def test_bandwidth(self):
        entries = transition_matrix(20, gate_noise_depolarizing(0.05)).entries
        for w_next in range(21):
            for w in range(21):
                if abs(w_next - w) > 2:
                    assert entries[w_next, w] == 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            transition_matrix(1)


class TestInitialWeightDistribution:
    def test_symmetric(self):
        dist = initial_weight_distribution(2, 0.5)
        assert np.allclose(dist.probs, [0.25, 0.5, 0.25], atol=1e-15)

    def test_clean(self):
        dist = initial_weight_distribution(2, 0.0)
        assert np.array_equal(dist.probs, [1.0, 0.0, 0.0])

    def test_binomial(self):
        dist = initial_weight_distribution(30, 0.02)
        for w in (0, 1, 5, 30):
            expected = math.comb(30, w) * 0.02**w * 0.98 ** (30 - w)
            assert dist.probs[w] == pytest.approx(expected, rel=1e-10)


class TestEvolve:
    def test_absorbing_clean_state(self):
        dist = WeightDistribution.delta(5, 0)
        out = evolve(dist, transition_matrix(5), 1000)
        assert out.probs[0] == pytest.approx(1.0, abs=1e-12)

    def test_zero_gates_is_identity(self):
        dist = initial_weight_distribution(4, 0.3)
        out = evolve(dist, transition_matrix(4), 0)
        assert np.allclose(out.probs, dist.probs, atol=1e-15)

    def test_single_gate_reads_column(self):
        out = evolve(WeightDistribution.delta(2, 1), transition_matrix(2), 1)
        assert np.allclose(out.probs, [0.0, 0.4, 0.6], atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            evolve(WeightDistribution.delta(3, 1), transition_matrix(4), 1)

    def test_convergence_to_stationary_mix(self):
        n = 10
        matrix = transition_matrix(n)
        start = initial_weight_distribution(n, 0.1)
        limit = start.probs[0] * np.eye(n + 1)[0] + (1.0 - start.probs[0]) * stationary_distribution(n).probs
        previous = np.inf
        for exponent in range(0, 15):
            out = evolve(start, matrix, 2**exponent)
            distance = np.abs(out.probs - limit).sum()
            assert distance <= previous + 1e-12
            previous = distance
        assert previous < 1e-10


class TestStationaryDistribution:
    def test_two_pairs(self):
        dist = stationary_distribution(2)
        assert np.allclose(dist.probs, [0.0, 0.4, 0.6], atol=1e-15)

    def test_three_pairs(self):
        dist = stationary_distribution(3)
        assert np.allclose(dist.probs, [0.0, 1.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0], atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 20, 50])
    def test_fixed_point(self, n):
        dist = stationary_distribution(n)
        assert dist.probs[0] == 0.0
        image = transition_matrix(n).entries @ dist.probs
        assert np.allclose(image, dist.probs, atol=1e-10)


class TestFiniteDepthPerformance:
    def test_clean_distribution(self):
        report = finite_depth_performance(WeightDistribution.delta(6, 0), 3)
        assert report.p_accept == pytest.approx(1.0, abs=1e-15)
        assert report.p_accept_and_phi == pytest.approx(1.0, abs=1e-15)

    def test_single_error_two_pairs(self):
        report = finite_depth_performance(WeightDistribution.delta(2, 1), 1)
        assert report.p_accept == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert report.p_accept_and_phi == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_full_twirl_equals_closed_form(self):
        probs = np.array([0.64, 0.0, 0.0]) + 0.36 * stationary_distribution(2).probs
        report = finite_depth_performance(WeightDistribution(2, probs), 1)
        reference = passive_performance(ProtocolParams(2, 1), 0.8)
        assert report.p_accept == pytest.approx(reference.p_accept, abs=1e-12)
        assert report.p_accept_and_phi == pytest.approx(reference.p_accept_and_phi, abs=1e-12)

    @pytest.mark.parametrize("n", [5, 10, 30])
    @pytest.mark.parametrize("epsilon", [0.02, 0.1])
    def test_full_twirl_limit(self, n, epsilon):
        dist = evolve(initial_weight_distribution(n, epsilon), transition_matrix(n), 10_000)
        for m in (1, n // 2):
            report = finite_depth_performance(dist, m)
            reference = passive_performance(ProtocolParams(n, m), FidelityPoint.from_infidelity(epsilon))
            assert report.pair_infidelity == pytest.approx(reference.pair_infidelity, abs=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            finite_depth_performance(WeightDistribution.delta(4, 0), 4)


def best_infidelity(dist, n):
    return min(finite_depth_performance(dist, m).pair_infidelity for m in range(1, n))


class TestNoisyPlateau:
    def test_infidelity_floor_tracks_gate_noise(self):
        n, epsilon = 30, 0.02
        start = initial_weight_distribution(n, epsilon)
        ladder = [300, 1000, 3000, 10000]
        clean = {g: best_infidelity(evolve(start, transition_matrix(n), g), n) for g in ladder}
        for lam in (1e-3, 1e-4):
            matrix = transition_matrix(n, gate_noise_depolarizing(lam))
            curve = {g: best_infidelity(evolve(start, matrix, g), n) for g in ladder}
            plateau = min(curve.values())
            assert lam / 10.0 <= plateau <= 10.0 * lam
            for g in ladder:
                assert curve[g] > clean[g]
            # beyond the optimum the accumulated gate noise only hurts
            values = [curve[g] for g in ladder]
            floor_at = values.index(min(values))
            tail = values[floor_at:]
            assert all(b >= a - 1e-15 for a, b in zip(tail, tail[1:]))

    def test_clean_curve_reaches_closed_form(self):
        n, epsilon = 30, 0.02
        dist = evolve(initial_weight_distribution(n, epsilon), transition_matrix(n), 10_000)
        m_best = min(range(1, n), key=lambda m: finite_depth_performance(dist, m).pair_infidelity)
        report = finite_depth_performance(dist, m_best)
        reference = passive_performance(ProtocolParams(n, m_best), FidelityPoint.from_infidelity(epsilon))
        assert report.pair_infidelity == pytest.approx(reference.pair_infidelity, abs=1e-6)
