"""Error-weight Markov chain of the finite-depth protocol.

Between all-to-all random two-slot scramblings, the only state that matters
is the number w of errored pair slots; a gate moves w by at most 1 with ideal
gates and at most 2 with noisy ones.  This module builds the column-stochastic
transition matrix, evolves weight distributions, and evaluates the exact
acceptance functional of a weight distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import EXACT, PerformanceReport, expected_overhead
from .pauli_dist import IDEAL_GATE, GateNoise

__all__ = [
    "WeightDistribution",
    "TransitionMatrix",
    "transition_matrix",
    "initial_weight_distribution",
    "evolve",
    "stationary_distribution",
    "finite_depth_performance",
]


@dataclass(frozen=True)
class WeightDistribution:
    """Probability vector over error weights 0..n."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.n + 1,):
            raise ValueError(f"need n+1 = {self.n + 1} entries, got shape {probs.shape}")
        if np.any(probs < -1e-12):
            raise ValueError("weight probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"weight probabilities must sum to 1, got {probs.sum()}")

    @classmethod
    def delta(cls, n: int, w: int) -> "WeightDistribution":
        probs = np.zeros(n + 1)
        probs[w] = 1.0
        return cls(n=n, probs=probs)


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic weight-transition operator; entries[w_next, w]."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", entries)
        size = self.n + 1
        if entries.shape != (size, size):
            raise ValueError(f"need a {size}x{size} matrix, got {entries.shape}")


def transition_matrix(n: int, noise: GateNoise | None = None) -> TransitionMatrix:
    """Weight-transition probabilities of one random two-slot gate on n pairs,
    with the given gate noise (ideal when omitted).

    Columns sum to one exactly up to rounding: the five bands share the common
    denominator 5n(n-1) and their numerators add to it identically.
    """
    if n < 2:
        raise ValueError(f"the two-slot chain needs n >= 2, got {n}")
    noise = IDEAL_GATE if noise is None else noise
    f0, f1, f2 = noise.f0, noise.f1, noise.f2
    entries = np.zeros((n + 1, n + 1))
    denom = 5.0 * n * (n - 1)
    for w in range(n + 1):
        clean_pairs = (n - w) * (n - w - 1)
        mixed_pairs = w * (n - w)
        error_pairs = w * (w - 1)
        if w + 2 <= n:
            entries[w + 2, w] = 3.0 * (1.0 - f0) * clean_pairs / denom
        if w + 1 <= n:
            entries[w + 1, w] = (2.0 * (1.0 - f0) * clean_pairs + 6.0 * (1.0 - f1) * mixed_pairs) / denom
        entries[w, w] = (5.0 * f0 * clean_pairs + 4.0 * (1.0 - f1) * mixed_pairs + 3.0 * (1.0 - f2) * error_pairs) / denom
        if w - 1 >= 0:
            entries[w - 1, w] = (10.0 * f1 * mixed_pairs + 2.0 * (1.0 - f2) * error_pairs) / denom
        if w - 2 >= 0:
            entries[w - 2, w] = f2 * error_pairs / (n * (n - 1))
    return TransitionMatrix(n=n, entries=entries)


def initial_weight_distribution(n: int, epsilon: float) -> WeightDistribution:
    """Binomial(n, epsilon) weights of slot-wise IID errors."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    probs = np.empty(n + 1)
    for w in range(n + 1):
        if epsilon == 0.0:
            probs[w] = 1.0 if w == 0 else 0.0
        elif epsilon == 1.0:
            probs[w] = 1.0 if w == n else 0.0
        else:
            log_p = (
                math.lgamma(n + 1)
                - math.lgamma(w + 1)
                - math.lgamma(n - w + 1)
                + w * math.log(epsilon)
                + (n - w) * math.log1p(-epsilon)
            )
            probs[w] = math.exp(log_p)
    return WeightDistribution(n=n, probs=probs)


def evolve(dist: WeightDistribution, matrix: TransitionMatrix, gates: int) -> WeightDistribution:
    """Apply the transition matrix ``gates`` times (repeated banded products,
    no eigendecomposition)."""
    if dist.n != matrix.n:
        raise ValueError(f"distribution over {dist.n} pairs but matrix for {matrix.n}")
    if gates < 0:
        raise ValueError("gate count must be >= 0")
    probs = dist.probs.copy()
    for _ in range(gates):
        probs = matrix.entries @ probs
    # renormalize rounding drift so long products stay a distribution
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum()
    return WeightDistribution(n=dist.n, probs=probs)


def stationary_distribution(n: int) -> WeightDistribution:
    """Fixed point of the ideal chain on the errored sector: the w >= 1 part of
    Binomial(n, 3/4), renormalized (weight of a uniformly random non-identity
    pattern)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    probs = np.zeros(n + 1)
    for w in range(1, n + 1):
        probs[w] = math.comb(n, w) * 3.0**w
    probs /= probs.sum()
    return WeightDistribution(n=n, probs=probs)


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def finite_depth_performance(dist: WeightDistribution, m: int) -> PerformanceReport:
    """Exact acceptance statistics of measuring m slots of a state with the
    given weight distribution (all weight-w patterns equally likely)."""
    n = dist.n
    if not (1 <= m <= n - 1):
        raise ValueError(f"need 1 <= m <= n-1, got m={m}, n={n}")
    k = n - m
    log3 = math.log(3.0)
    p_joint = 0.0
    gap = 0.0  # p_accept - p_joint, summed directly so tiny infidelities survive
    for w in range(n + 1):
        x_w = dist.probs[w]
        if x_w == 0.0:
            continue
        log_nw = _log_comb(n, w)
        if w <= m:
            p_joint += x_w * math.exp(_log_comb(m, w) - log_nw - w * log3)
        for j in range(max(1, w - m), min(w, k) + 1):
            gap += x_w * math.exp(_log_comb(k, j) + _log_comb(m, w - j) + j * log3 - log_nw - w * log3)
    p_accept = min(p_joint + gap, 1.0)
    if p_accept <= 0.0:
        block_infidelity = 1.0
    else:
        block_infidelity = gap / p_accept
    block_fidelity = 1.0 - block_infidelity
    pair_infidelity = -math.expm1(math.log1p(-block_infidelity) / k) if block_infidelity < 1.0 else 1.0
    return PerformanceReport(
        p_accept=p_accept,
        p_accept_and_phi=p_joint,
        block_fidelity=block_fidelity,
        pair_infidelity=pair_infidelity,
        expected_overhead=expected_overhead(n, k, p_accept) if p_accept > 0.0 else math.inf,
        exactness={name: EXACT for name in ("p_accept", "p_accept_and_phi", "block_fidelity", "pair_infidelity", "expected_overhead")},
    )
