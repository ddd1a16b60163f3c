"""Structured noise models and guaranteed bounds for the syndrome-decoding mode.

Covers the IID depolarizing input model (whose error probabilities are ordered
by weight, which is what makes a most-likely-first lookup decoder meaningful),
the three fidelity parameters (f0, f1, f2) characterizing two-qubit gate noise
in the weight chain, and the acceptance/fidelity bounds of the budget-E
correction strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

from .analytic import ProtocolParams
from .mc_types import PauliFrame

__all__ = [
    "IIDDepolarizing",
    "GateNoise",
    "ActiveReport",
    "IDEAL_GATE",
    "gate_noise_depolarizing",
    "gate_noise_amplitude_damping",
    "top_error_mass",
    "active_bounds",
    "enumerate_top_errors",
]

ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class IIDDepolarizing(object):
    """Independent per-pair depolarizing errors: each of the n pairs carries a
    uniform X/Y/Z error with probability epsilon (epsilon/3 each).

    Weight-w strings all share the probability (1-eps)^(n-w) (eps/3)^w, which
    is non-increasing in w exactly when eps < 3/4; that ordering is required
    by every weight-ordered construction below.
    """

    n: int
    epsilon: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"pair count must be >= 1, got {self.n}")
        if not (0.0 <= self.epsilon < 0.75):
            raise ValueError(f"weight ordering needs epsilon in [0, 3/4), got {self.epsilon}")

    def string_log_prob(self, weight: int) -> float:
        """log probability of any single string of the given weight."""
        if weight == 0:
            return self.n * math.log1p(-self.epsilon)
        if self.epsilon == 0.0:
            return -math.inf
        return (self.n - weight) * math.log1p(-self.epsilon) + weight * math.log(self.epsilon / 3.0)

    def string_prob(self, weight: int) -> float:
        return math.exp(self.string_log_prob(weight))

    def class_count(self, weight: int) -> int:
        """Number of strings of the given weight (exact integer)."""
        return math.comb(self.n, weight) * 3**weight

    def class_mass(self, weight: int) -> float:
        """Total probability of the weight class: binomial(n, epsilon) at w."""
        if self.epsilon == 0.0:
            return 1.0 if weight == 0 else 0.0
        log_mass = (
            math.lgamma(self.n + 1)
            - math.lgamma(weight + 1)
            - math.lgamma(self.n - weight + 1)
            + weight * math.log(self.epsilon)
            + (self.n - weight) * math.log1p(-self.epsilon)
        )
        return math.exp(log_mass)


@dataclass(frozen=True)
class GateNoise:
    """Two-qubit gate noise reduced to the three return probabilities used by
    the weight chain: f0 from a clean pair of pairs, f1 from one errored pair,
    f2 from two errored pairs.  Ideal gates are (1, 0, 0)."""

    f0: float
    f1: float
    f2: float

    def __post_init__(self):
        for name in ("f0", "f1", "f2"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")


IDEAL_GATE = GateNoise(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class ActiveReport:
    """Guaranteed performance envelope of a budget-E correction round.

    q is the total probability of the budget+1 most likely input errors; the
    acceptance probability is certain to land in
    [p_accept_lower, p_accept_upper] and the k-pair output fidelity is at
    least fidelity_lower_bound.  expected_overhead_upper uses the acceptance
    lower bound, so it upper-bounds the true expected overhead.
    """

    q: float
    fidelity_lower_bound: float
    p_accept_lower: float
    p_accept_upper: float
    joint_lower: float
    expected_overhead_upper: float


def gate_noise_depolarizing(lam: float) -> GateNoise:
    """Fidelity parameters of two-qubit depolarizing noise of strength lam,
    applied independently on both halves of the gate."""
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"depolarizing strength must be in [0, 1], got {lam}")
    f0 = (1.0 - lam) ** 2 + lam**2 / 15.0
    f12 = (lam / 15.0) * (2.0 - 16.0 * lam / 15.0)
    return GateNoise(f0=f0, f1=f12, f2=f12)


def gate_noise_amplitude_damping(gamma: float) -> GateNoise:
    """Fidelity parameters of per-qubit amplitude damping with parameter gamma."""
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"damping parameter must be in [0, 1], got {gamma}")
    f0 = (gamma**2 / 2.0 - gamma + 1.0) ** 2
    f1 = gamma * (gamma**3 - 2.0 * gamma + 4.0) / 12.0
    f2 = gamma**2 * (gamma + 2.0) ** 2 / 36.0
    return GateNoise(f0=f0, f1=f1, f2=f2)


def top_error_mass(model: IIDDepolarizing, budget: int) -> tuple[float, int]:
    """Total probability q of the budget+1 most likely error strings.

    Accumulates whole weight classes and a pro-rata slice of the final class
    when budget+1 lands inside one, so the cost is the number of weight
    classes, never the number of strings.  Returns ``(q, covered)`` with
    covered = budget + 1.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    need = budget + 1
    total_strings = 4**model.n
    if need >= total_strings:
        return 1.0, need
    q = 0.0
    for w in range(model.n + 1):
        count = model.class_count(w)
        if need >= count:
            q += model.class_mass(w)
            need -= count
            if need == 0:
                break
        else:
            q += need * model.string_prob(w)
            break
    return min(q, 1.0), budget + 1


def active_bounds(params: ProtocolParams, model: IIDDepolarizing) -> ActiveReport:
    """Guaranteed acceptance and fidelity bounds for a budget-E round on IID
    depolarizing input.  With budget 0 the fidelity bound coincides with the
    passive one."""
    if params.is_passive:
        raise ValueError("active_bounds requires an active-mode round (budget set)")
    if params.n != model.n:
        raise ValueError(f"round is over {params.n} pairs but model has {model.n}")
    budget = params.budget
    q, _ = top_error_mass(model, budget)
    fn = math.exp(model.n * math.log1p(-model.epsilon))
    leak = math.ldexp(budget + 1, -params.m)  # 2^-m (E+1)
    fidelity_lower = 1.0 - leak * (1.0 / q - 1.0)
    p_lower = q
    p_upper = min(1.0, q + leak * (1.0 - q))
    joint_lower = q - math.ldexp(budget, -params.m) * (q - fn)
    return ActiveReport(
        q=q,
        fidelity_lower_bound=fidelity_lower,
        p_accept_lower=p_lower,
        p_accept_upper=p_upper,
        joint_lower=joint_lower,
        expected_overhead_upper=params.n / (params.k * q),
    )


def enumerate_top_errors(model: IIDDepolarizing, budget: int, cap: int = ENUMERATION_CAP):
    """The budget+1 most likely error strings, most likely first.

    Ordered by increasing weight; within a weight class the order is
    lexicographic over slot positions with per-slot letters X < Y < Z, which
    pins down a reproducible decoder table (the bounds above do not depend on
    the tie order).  Returns a list of PauliFrame.
    """
    if budget + 1 > cap:
        raise ValueError(f"budget+1 = {budget + 1} exceeds enumeration cap {cap}")
    need = budget + 1
    frames: list[PauliFrame] = []
    letters = ((1, 0), (1, 1), (0, 1))  # X, Y, Z as (x bit, z bit)
    for w in range(model.n + 1):
        if need == 0:
            break
        if w == 0:
            frames.append(PauliFrame.identity(model.n))
            need -= 1
            continue
        for slots in combinations(range(model.n), w):
            if need == 0:
                break
            for assignment in product(letters, repeat=w):
                x_mask = 0
                z_mask = 0
                for slot, (x_bit, z_bit) in zip(slots, assignment):
                    x_mask |= x_bit << slot
                    z_mask |= z_bit << slot
                frames.append(PauliFrame(n=model.n, x_mask=x_mask, z_mask=z_mask))
                need -= 1
                if need == 0:
                    break
    return frames
