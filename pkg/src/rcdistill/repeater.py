"""Nested repeater-chain evaluation with interleaved distillation.

A chain of 2^T equal segments is merged level by level: at each level the
current pairs may be distilled (one passive round), then neighboring links
are swapped into links of twice the length.  Swapping is modeled by the
doubling rule eps -> min(2 eps, 1); merging two child links consumes the
pairs 2:1, so every level multiplies the end-to-end overhead by 2 on top of
the distillation rounds' own overheads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import FidelityPoint, ProtocolParams, passive_performance
from .errors import InfeasibleError

__all__ = [
    "RepeaterPlan",
    "SchemeReport",
    "swap_propagate",
    "evaluate_scheme",
    "largest_feasible_levels",
    "heuristic_search",
]

MAX_LEVELS = 9


@dataclass(frozen=True)
class RepeaterPlan:
    """2^levels segments with optional distillation per level.

    ``per_level`` has levels+1 entries: entry 0 applies to the raw links
    before any swapping, entry i (1 <= i <= levels) at the start of level i,
    before that level's swap.
    """

    levels: int
    link_infidelity: float
    per_level: tuple[ProtocolParams | None, ...]

    def __post_init__(self):
        if self.levels < 0:
            raise ValueError(f"level count must be >= 0, got {self.levels}")
        if not (0.0 <= self.link_infidelity <= 0.5):
            raise ValueError(f"link infidelity must be in [0, 0.5], got {self.link_infidelity}")
        if len(self.per_level) != self.levels + 1:
            raise ValueError(f"need levels+1 = {self.levels + 1} per-level entries, got {len(self.per_level)}")


@dataclass(frozen=True)
class SchemeReport:
    end_to_end_infidelity: float
    end_to_end_overhead: float
    overhead_per_segment: float
    level_infidelities: tuple[float, ...]


def swap_propagate(epsilon: float) -> float:
    """Infidelity after merging two links of the given infidelity: the
    doubling rule, capped at 1."""
    if not (0.0 <= epsilon <= 0.5):
        raise ValueError(f"swap model expects epsilon in [0, 0.5], got {epsilon}")
    return min(2.0 * epsilon, 1.0)


def _distill(epsilon: float, params: ProtocolParams) -> tuple[float, float]:
    report = passive_performance(params, FidelityPoint.from_infidelity(epsilon))
    return report.pair_infidelity, report.expected_overhead


def evaluate_scheme(plan: RepeaterPlan) -> SchemeReport:
    """End-to-end infidelity and overhead of the nested scheme: per level,
    distill (when parameters are present) then swap."""
    eps = plan.link_infidelity
    overhead_rounds = 1.0
    trace = []
    if plan.per_level[0] is not None:
        eps, ovh = _distill(eps, plan.per_level[0])
        overhead_rounds *= ovh
    trace.append(eps)
    for level in range(1, plan.levels + 1):
        params = plan.per_level[level]
        if params is not None:
            if eps > 0.5:
                raise InfeasibleError(f"level {level} input infidelity {eps} is beyond distillation range")
            eps, ovh = _distill(eps, params)
            overhead_rounds *= ovh
        eps = swap_propagate(min(eps, 0.5))
        trace.append(eps)
    return SchemeReport(
        end_to_end_infidelity=eps,
        end_to_end_overhead=overhead_rounds * 2.0**plan.levels,
        overhead_per_segment=overhead_rounds,
        level_infidelities=tuple(trace),
    )


def _triple_plan(link_infidelity: float, levels: int, first: ProtocolParams | None, maintenance: ProtocolParams | None) -> RepeaterPlan:
    per_level: list[ProtocolParams | None] = [None] * (levels + 1)
    if levels >= 1:
        per_level[1] = first
        for i in range(2, levels + 1):
            per_level[i] = maintenance
    elif first is not None:
        per_level[0] = first
    return RepeaterPlan(levels=levels, link_infidelity=link_infidelity, per_level=tuple(per_level))


def largest_feasible_levels(
    link_infidelity: float,
    target: float,
    first: ProtocolParams,
    maintenance: ProtocolParams,
    levels_cap: int = MAX_LEVELS,
) -> int:
    """Largest T <= levels_cap for which the (first, maintenance) scheme stays
    at or below the target end-to-end; raises InfeasibleError when even T = 1
    fails."""
    best = 0
    for levels in range(1, levels_cap + 1):
        plan = _triple_plan(link_infidelity, levels, first, maintenance)
        try:
            report = evaluate_scheme(plan)
        except InfeasibleError:
            break
        if report.end_to_end_infidelity <= target:
            best = levels
    if best == 0:
        raise InfeasibleError("the scheme misses the target already at one level")
    return best


def _best_maintenance(plan_fn, target: float, n_cap: int):
    """Cheapest feasible maintenance size n' for a fixed first round; returns
    (overhead, n', plan) or None."""
    best = None
    for n_prime in range(2, n_cap + 1):
        plan = plan_fn(ProtocolParams(n=n_prime, m=1))
        try:
            report = evaluate_scheme(plan)
        except InfeasibleError:
            continue
        if report.end_to_end_infidelity > target:
            continue
        if best is None or report.end_to_end_overhead < best[0]:
            best = (report.end_to_end_overhead, n_prime, plan)
    return best


def heuristic_search(
    epsilon_link: float,
    target: float,
    n_cap: int = 100,
    levels: int = MAX_LEVELS,
) -> tuple[int, int, int, RepeaterPlan]:
    """Three-parameter scheme search: a first round (n, k) bringing raw links
    to the target, then identical (n', n'-1) maintenance rounds at the higher
    levels.

    For each candidate n, k is walked down from the largest value whose
    single round meets the target until some maintenance size n' makes the
    whole chain feasible; larger k means strictly lower first-round overhead,
    so that k is kept for the n.  The overhead-minimizing feasible triple
    wins (ties to smaller n).  Returns ``(n, k, n_prime, plan)``.
    """
    if not (0.0 < target) or not (0.0 <= epsilon_link <= 0.5):
        raise ValueError("need target > 0 and link infidelity in [0, 0.5]")
    no_distill = RepeaterPlan(levels=levels, link_infidelity=epsilon_link, per_level=(None,) * (levels + 1))
    if target >= epsilon_link and evaluate_scheme(no_distill).end_to_end_infidelity <= target:
        return 0, 0, 0, no_distill

    point = FidelityPoint.from_infidelity(epsilon_link)
    best = None  # ((overhead, n, n_prime), n, k, n_prime, plan)
    for n in range(2, n_cap + 1):
        for m in range(1, n):
            first = ProtocolParams(n=n, m=m)
            if passive_performance(first, point).pair_infidelity > target:
                continue
            found = _best_maintenance(
                lambda maint: _triple_plan(epsilon_link, levels, first, maint), target, n_cap
            )
            if found is None:
                continue
            overhead, n_prime, plan = found
            key = (overhead, n, n_prime)
            if best is None or key < best[0]:
                best = (key, n, first.k, n_prime, plan)
            break  # largest chain-feasible k for this n found
    if best is None:
        raise InfeasibleError(
            f"no (n <= {n_cap}, k, n') scheme reaches {target} over {levels} levels from {epsilon_link}"
        )
    _, n, k, n_prime, plan = best
    return n, k, n_prime, plan
