"""Trial-level Monte Carlo simulation of the distillation round.

This is the independent check on every closed form in the package: each trial
samples a fresh uniformly random symplectic Clifford, pushes an IID error
pattern through it, extracts syndromes and applies the passive or the
lookup-decoding acceptance rule.  The finite-depth simulator replaces the
global Clifford by a sequence of noisy random two-slot scramblings.

Estimates are reproducible: identical (seed, trials, parameters) give
bit-identical results regardless of thread count, because every trial owns a
counter-derived substream and the reductions are integer sums.
"""

from __future__ import annotations

import numpy as np

from . import _mc_kernels as _k
from .mc_types import MAX_MC_PAIRS, MCEstimate, PauliFrame, SymplecticClifford, symplectic_form, symplectic_group_order
from .pauli_dist import ENUMERATION_CAP, IIDDepolarizing, enumerate_top_errors

__all__ = [
    "PauliFrame",
    "SymplecticClifford",
    "MCEstimate",
    "sample_clifford",
    "conjugate",
    "estimate_passive",
    "estimate_active",
    "estimate_finite_depth",
    "empirical_gate_return_probs",
    "group_element_indices",
    "orbit_images",
    "syndrome_collision_rate",
    "symplectic_form",
    "symplectic_group_order",
]

MAX_ACTIVE_SYNDROME_BITS = 20


def _check_pairs(n: int):
    if not (1 <= n <= MAX_MC_PAIRS):
        raise ValueError(f"Monte Carlo supports 1 <= n <= {MAX_MC_PAIRS} pairs, got {n}")


def _check_round(n: int, m: int):
    _check_pairs(n)
    if not (1 <= m <= n - 1):
        raise ValueError(f"need 1 <= m <= n-1, got m={m}, n={n}")


def _seed_for(rng) -> int:
    if isinstance(rng, (int, np.integer)):
        return int(rng) & 0xFFFFFFFFFFFFFFFF
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**64, dtype=np.uint64))
    raise TypeError("rng must be an integer seed or a numpy Generator")


def _seed64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


def sample_clifford(n: int, rng) -> SymplecticClifford:
    """One uniformly random element of Sp(2n, 2).

    ``rng`` is either an integer seed (deterministic single draw) or a
    ``numpy.random.Generator`` advancing one 64-bit word per call.
    """
    _check_pairs(n)
    rows = np.empty(2 * n, dtype=np.uint64)
    ks = np.empty(n, dtype=np.uint64)
    bs = np.empty(n, dtype=np.uint64)
    if isinstance(rng, np.random.Generator):
        for level in range(1, n + 1):
            if level < 32:
                ks[level - 1] = rng.integers(1, 4**level, dtype=np.uint64)
            else:
                ks[level - 1] = rng.integers(1, 2**64 - 1, dtype=np.uint64, endpoint=True)
            bs[level - 1] = rng.integers(0, 2 ** (2 * level - 1), dtype=np.uint64)
        _k.build_rows(n, ks, bs, rows)
    else:
        state = np.uint64(_k.stream_init(np.uint64(_seed_for(rng)), np.uint64(0)))
        _k.draw_group_element(state, n, rows)
    return SymplecticClifford(n=n, rows=tuple(int(r) for r in rows))


def conjugate(clifford: SymplecticClifford, frame: PauliFrame) -> PauliFrame:
    """Image of a Pauli pattern under the Clifford's symplectic action."""
    return clifford.conjugate(frame)


def estimate_passive(n: int, m: int, epsilon: float, trials: int, seed: int) -> tuple[MCEstimate, MCEstimate]:
    """Acceptance and accept-with-ideal-output rates of the passive round on
    IID depolarized pairs.  Returns (accept, accept_and_phi) estimates."""
    _check_round(n, m)
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if trials < 1:
        raise ValueError("need at least one trial")
    out_accept = np.zeros(trials, dtype=np.uint8)
    out_phi = np.zeros(trials, dtype=np.uint8)
    _k.passive_trials(n, m, float(epsilon), trials, _seed64(seed), out_accept, out_phi)
    return (
        MCEstimate.from_count(int(out_accept.sum()), trials),
        MCEstimate.from_count(int(out_phi.sum()), trials),
    )


def estimate_active(n: int, m: int, budget: int, epsilon: float, trials: int, seed: int) -> tuple[MCEstimate, MCEstimate]:
    """Same as :func:`estimate_passive` but with lookup decoding of the
    budget+1 most likely errors; the table is rebuilt for every sampled
    Clifford (its syndromes depend on it)."""
    _check_round(n, m)
    if m > MAX_ACTIVE_SYNDROME_BITS:
        raise ValueError(f"decoder table needs m <= {MAX_ACTIVE_SYNDROME_BITS}, got {m}")
    if budget + 1 > ENUMERATION_CAP:
        raise ValueError(f"budget+1 = {budget + 1} exceeds enumeration cap {ENUMERATION_CAP}")
    if trials < 1:
        raise ValueError("need at least one trial")
    model = IIDDepolarizing(n=n, epsilon=epsilon)
    err_packed = np.array([frame.packed() for frame in enumerate_top_errors(model, budget)], dtype=np.uint64)
    out_accept = np.zeros(trials, dtype=np.uint8)
    out_phi = np.zeros(trials, dtype=np.uint8)
    _k.active_trials(n, m, float(epsilon), err_packed, trials, _seed64(seed), out_accept, out_phi)
    return (
        MCEstimate.from_count(int(out_accept.sum()), trials),
        MCEstimate.from_count(int(out_phi.sum()), trials),
    )


def estimate_finite_depth(
    n: int,
    m: int,
    gates: int,
    epsilon: float,
    trials: int,
    seed: int,
    depolarizing_strength: float = 0.0,
) -> tuple[MCEstimate, MCEstimate, np.ndarray]:
    """Gate-by-gate simulation: ``gates`` random two-slot scramblings, each
    preceded by depolarizing hits of the given strength on both halves.

    Returns (accept, accept_and_phi, weight_histogram) where the histogram
    counts the pre-measurement error weights over all trials (length n+1).
    Only depolarizing gate noise has a Pauli trial-level realization; other
    channels are handled analytically by the weight chain.
    """
    _check_round(n, m)
    if gates < 0:
        raise ValueError("gate count must be >= 0")
    if not (0.0 <= depolarizing_strength <= 1.0):
        raise ValueError(f"depolarizing strength must be in [0, 1], got {depolarizing_strength}")
    if trials < 1:
        raise ValueError("need at least one trial")
    out_accept = np.zeros(trials, dtype=np.uint8)
    out_phi = np.zeros(trials, dtype=np.uint8)
    out_weight = np.zeros(trials, dtype=np.int64)
    _k.finite_depth_trials(
        n, m, gates, float(epsilon), float(depolarizing_strength), trials, _seed64(seed), out_accept, out_phi, out_weight
    )
    histogram = np.bincount(out_weight, minlength=n + 1)
    return (
        MCEstimate.from_count(int(out_accept.sum()), trials),
        MCEstimate.from_count(int(out_phi.sum()), trials),
        histogram,
    )


def empirical_gate_return_probs(depolarizing_strength: float, trials: int, seed: int) -> tuple[MCEstimate, MCEstimate, MCEstimate]:
    """Empirical (f0, f1, f2) induced by the trial-level noise realization:
    the probability that a clean / singly-errored / doubly-errored two-slot
    pattern is clean again after the two per-gate hits."""
    estimates = []
    for start_class in (0, 1, 2):
        hits = _k.gate_noise_return_census(float(depolarizing_strength), start_class, trials, _seed64(seed) + np.uint64(start_class))
        estimates.append(MCEstimate.from_count(int(hits), trials))
    return tuple(estimates)


def group_element_indices(n: int, trials: int, seed: int) -> np.ndarray:
    """Sampled group elements as packed integer fingerprints (row bits
    stacked); practical for n <= 2."""
    _check_pairs(n)
    if 2 * n * 2 * n > 64:
        raise ValueError("fingerprints only fit for n <= 2")
    out = np.empty(trials, dtype=np.uint64)
    _k.group_element_census(n, trials, _seed64(seed), out)
    return out


def orbit_images(n: int, frame: PauliFrame, trials: int, seed: int) -> np.ndarray:
    """Packed images of a fixed pattern under independent random Cliffords."""
    _check_pairs(n)
    out = np.empty(trials, dtype=np.uint64)
    _k.orbit_census(n, np.uint64(frame.packed()), trials, _seed64(seed), out)
    return out


def syndrome_collision_rate(n: int, m: int, frame_a: PauliFrame, frame_b: PauliFrame, trials: int, seed: int) -> MCEstimate:
    """How often two fixed patterns produce identical syndromes under a shared
    random Clifford."""
    _check_round(n, m)
    hits = _k.syndrome_collision_census(n, m, np.uint64(frame_a.packed()), np.uint64(frame_b.packed()), trials, _seed64(seed))
    return MCEstimate.from_count(int(hits), trials)
