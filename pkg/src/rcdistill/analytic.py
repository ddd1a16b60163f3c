"""Closed-form performance model for error-detected (passive) distillation rounds.

A round takes n noisy Bell pairs of single-pair fidelity f, scrambles them with
a uniformly random bilocal Clifford, measures the first m = n - k pairs and
keeps the remaining k.  Acceptance and output-fidelity statistics of this
process have exact expressions; everything here is evaluated in a form that
stays accurate for n in the hundreds, where f^n and 4^-n underflow naive
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

LN2 = math.log(2.0)

__all__ = [
    "FidelityPoint",
    "ProtocolParams",
    "PerformanceReport",
    "SyndromeRelation",
    "twirl_weights",
    "passive_performance",
    "expected_overhead",
    "improvement_threshold",
    "syndrome_match_probability",
]


@dataclass(frozen=True)
class FidelityPoint:
    """Single-pair fidelity f and its infidelity epsilon = 1 - f.

    Carrying both avoids the catastrophic cancellation of recovering a tiny
    epsilon from f; for a product of pairs f is the geometric mean of the
    individual fidelities.
    """

    f: float
    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.f <= 1.0):
            raise ValueError(f"fidelity must be in (0, 1], got {self.f}")
        if abs((1.0 - self.f) - self.epsilon) > 1e-12 * max(1.0, self.epsilon):
            raise ValueError("epsilon must equal 1 - f")

    @classmethod
    def from_fidelity(cls, f: float) -> "FidelityPoint":
        return cls(f=f, epsilon=1.0 - f)

    @classmethod
    def from_infidelity(cls, epsilon: float) -> "FidelityPoint":
        if not (0.0 <= epsilon < 1.0):
            raise ValueError(f"infidelity must be in [0, 1), got {epsilon}")
        return cls(f=1.0 - epsilon, epsilon=epsilon)

    def log_f(self) -> float:
        """log(f), computed from epsilon so that f near 1 keeps full precision."""
        return math.log1p(-self.epsilon)


def _as_point(f) -> FidelityPoint:
    if isinstance(f, FidelityPoint):
        return f
    return FidelityPoint.from_fidelity(float(f))


@dataclass(frozen=True)
class ProtocolParams:
    """One distillation round: n input pairs, m measured, k = n - m kept.

    ``budget`` selects the mode: ``None`` is the reject-on-any-syndrome
    (passive) round; an integer >= 0 is the syndrome-decoding (active) round
    that attempts to correct the budget+1 most likely errors.  budget = 0
    behaves identically to passive.
    """

    n: int
    m: int
    budget: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 input pairs, got n={self.n}")
        if not (1 <= self.m <= self.n - 1):
            raise ValueError(f"measured count must satisfy 1 <= m <= n-1, got m={self.m}, n={self.n}")
        if self.budget is not None and self.budget < 0:
            raise ValueError(f"correction budget must be >= 0, got {self.budget}")

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def is_passive(self) -> bool:
        return self.budget is None

    def describe(self) -> str:
        mode = "passive" if self.is_passive else f"active(E={self.budget})"
        return f"{self.n}->{self.k} ({mode})"


EXACT = "exact"
GUARANTEED_BOUND = "guaranteed-bound"


@dataclass(frozen=True)
class PerformanceReport:
    """Acceptance/output statistics of one round.

    block_fidelity is the joint fidelity of all k outputs, pair_infidelity the
    per-pair infidelity 1 - block_fidelity**(1/k).  ``exactness`` records per
    field whether the value is exact or a guaranteed one-sided bound.
    """

    p_accept: float
    p_accept_and_phi: float
    block_fidelity: float
    pair_infidelity: float
    expected_overhead: float
    exactness: Mapping[str, str] = field(default_factory=dict)


class SyndromeRelation(Enum):
    EQUAL = "equal"
    COMMUTE_DISTINCT = "commute-distinct"
    ANTICOMMUTE = "anticommute"


def twirl_weights(f, n: int) -> tuple[float, float]:
    """Coefficients of the two-component mixture left by the random-Clifford twirl.

    Returns ``(phi_weight, per_pauli_weight)``: the weight on the ideal
    n-pair state and the common weight on each of the 4**n - 1 error-tagged
    states, satisfying phi_weight + (4**n - 1) * per_pauli_weight = 1.
    """
    point = _as_point(f)
    if n < 1:
        raise ValueError(f"pair count must be >= 1, got {n}")
    phi = math.exp(n * point.log_f())
    # (1 - f^n) / (4^n - 1), with both factors evaluated without cancellation
    one_minus_phi = -math.expm1(n * point.log_f())
    denom = -math.expm1(-2 * n * LN2)  # 1 - 4^-n
    per_pauli = one_minus_phi * math.ldexp(1.0, -2 * n) / denom
    return phi, per_pauli


def passive_performance(params: ProtocolParams, f) -> PerformanceReport:
    """Exact statistics of a passive round on pairs of single-pair fidelity f.

    Stable for n up to several hundred: 2-power ratios are built from
    ``ldexp`` and the acceptance/fidelity gap is formed analytically instead
    of subtracting nearly equal probabilities.
    """
    if not params.is_passive and params.budget != 0:
        raise ValueError("passive_performance requires a passive-mode round")
    point = _as_point(f)
    n, m, k = params.n, params.m, params.k

    log_fn = n * point.log_f()
    phi = math.exp(log_fn)  # f^n
    one_minus_phi = -math.expm1(log_fn)
    denom = -math.expm1(-2 * n * LN2)  # 1 - 4^-n

    # (2^m 4^k - 1) / (4^n - 1) and (2^m - 1) / (4^n - 1)
    r_acc = (math.ldexp(1.0, m + 2 * k - 2 * n) - math.ldexp(1.0, -2 * n)) / denom
    r_phi = (math.ldexp(1.0, m - 2 * n) - math.ldexp(1.0, -2 * n)) / denom

    p_accept = phi + one_minus_phi * r_acc
    p_joint = phi + one_minus_phi * r_phi

    # 1 - p_joint/p_accept, formed from the exact difference of the ratios
    gap = one_minus_phi * (math.ldexp(1.0, m + 2 * k - 2 * n) - math.ldexp(1.0, m - 2 * n)) / denom
    block_infidelity = gap / p_accept
    block_fidelity = 1.0 - block_infidelity
    pair_infidelity = -math.expm1(math.log1p(-block_infidelity) / k)

    return PerformanceReport(
        p_accept=p_accept,
        p_accept_and_phi=p_joint,
        block_fidelity=block_fidelity,
        pair_infidelity=pair_infidelity,
        expected_overhead=expected_overhead(n, k, p_accept),
        exactness={name: EXACT for name in ("p_accept", "p_accept_and_phi", "block_fidelity", "pair_infidelity", "expected_overhead")},
    )


def expected_overhead(n: int, k: int, p_accept: float) -> float:
    """Expected input pairs consumed per output pair: n / (k * p_accept)."""
    if not (1 <= k <= n):
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    if not (0.0 < p_accept <= 1.0):
        raise ValueError(f"acceptance probability must be in (0, 1], got {p_accept}")
    return n / (k * p_accept)


def _improves_exactly(n: int, m: int, point: FidelityPoint) -> bool:
    report = passive_performance(ProtocolParams(n=n, m=m), point)
    return report.pair_infidelity < point.epsilon


def improvement_threshold(n: int, f) -> tuple[float, int | None]:
    """Measurement fraction beyond which output fidelity grows with n, and the
    smallest per-round m guaranteeing single-pair fidelity improvement.

    Returns ``(critical_fraction, min_m)`` with critical_fraction = -log2(f).
    min_m is the ceiling of the sufficient condition
    log2((1 - f^n) / (f^(n-1) (1 - f))), clipped into [1, n-1] and then
    verified against the exact output fidelity (the condition is sufficient,
    not necessary, so the clipped value can still pass); it is None when no
    m <= n-1 improves fidelity (at f <= 0.5 the output never strictly beats
    the input).
    """
    point = _as_point(f)
    if point.f >= 1.0 or point.f <= 0.0:
        raise ValueError("improvement threshold needs 0 < f < 1")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    log2_f = point.log_f() / LN2
    critical_fraction = -log2_f

    log2_one_minus_fn = math.log2(-math.expm1(n * point.log_f()))
    bound = log2_one_minus_fn - (n - 1) * log2_f - math.log2(point.epsilon)
    m = max(1, min(n - 1, math.ceil(bound - 1e-9)))
    while m <= n - 1:
        if _improves_exactly(n, m, point):
            return critical_fraction, m
        m += 1
    return critical_fraction, None


def syndrome_match_probability(n: int, m: int, relation: SyndromeRelation) -> float:
    """Idealized probability that two error patterns acquire identical
    syndromes under a shared uniformly random Clifford, by commutation
    relation.

    These are the counting values the acceptance analysis budgets with; each
    is at most 2^-m for distinct patterns, and that envelope is what the
    downstream bounds consume.  The exact finite-n group averages sit
    slightly below 2^-m (a pattern that is Z-type on every measured slot can
    never collide), converging to these values as n grows.
    """
    if not (1 <= m <= n - 1):
        raise ValueError(f"need 1 <= m <= n-1, got m={m}, n={n}")
    if relation is SyndromeRelation.EQUAL:
        return 1.0
    if relation is SyndromeRelation.ANTICOMMUTE:
        return math.ldexp(1.0, -m)
    # distinct commuting pair: (2^-m * 4^n/2 - 2) / (4^n/2 - 2)
    half = math.ldexp(1.0, 2 * n - 1)
    return (math.ldexp(half, -m) - 2.0) / (half - 2.0)
