"""Concatenation planning: chain distillation rounds to reach a target
infidelity at minimum expected overhead.

Layer accounting is per-pair: the output pairs of one layer enter the next at
their geometric-mean fidelity, which is valid for arbitrarily correlated
outputs.  Passive layers are scored with the exact closed forms (or their
guaranteed bounds, selectable); an optional first layer with syndrome
decoding of IID depolarizing input is always scored with its guaranteed
bounds, since its exact statistics have no closed form.

The optimizer is a deterministic dynamic program on a log-spaced infidelity
grid; the alternative "recipe" strategy follows the fixed parameter schedule
n = ceil(1/sqrt(eps)), m = ceil(log2(1/eps_next)) with the layer targets
eps -> 2^(-eps^(-1/3)), whose overhead factors form a convergent product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import EXACT, GUARANTEED_BOUND, FidelityPoint, ProtocolParams, passive_performance
from .errors import InfeasibleError
from .pauli_dist import IIDDepolarizing, active_bounds

__all__ = [
    "PlanLayer",
    "ConcatenationPlan",
    "auto_params",
    "plan_concatenation",
    "guaranteed_overhead",
    "simulate_retries",
    "simulate_budget_restart",
]

DEFAULT_GRID_NODES = 512
DEGENERATE_GRACE = 1e-3  # inputs this close to target need no distillation


@dataclass(frozen=True)
class PlanLayer:
    """One round in a concatenated plan, evaluated at its assumed input.

    ``input_infidelity`` is the grid value the layer was planned against; the
    true input is never larger, so ``output_infidelity`` (exact for passive
    accounting, guaranteed bound otherwise) and ``expected_overhead`` are
    conservative."""

    params: ProtocolParams
    input_infidelity: float
    output_infidelity: float
    p_accept: float
    expected_overhead: float
    accounting: str


@dataclass(frozen=True)
class ConcatenationPlan:
    layers: tuple[PlanLayer, ...]
    final_infidelity: float
    expected_overhead: float
    delta: float
    guaranteed_overhead: float

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    @property
    def peak_memory_pairs(self) -> int:
        return max((layer.params.n for layer in self.layers), default=0)


def _ceil_tol(x: float) -> int:
    """Ceiling with a small absolute tolerance so values that are integers up
    to rounding noise do not get bumped."""
    return math.ceil(x - 1e-9)


def auto_params(epsilon: float, epsilon_f: float) -> ProtocolParams:
    """Parameter rule n = ceil(1/sqrt(eps)), m = ceil(log2(1/eps_f)).

    Valid for epsilon <= 0.05 and targets no more ambitious than
    2^(-eps^(-1/3)) per round; within that domain the exact expected overhead
    of the resulting round stays below exp(2 * epsilon^(1/6)).
    """
    if not (0.0 < epsilon <= 0.05):
        raise ValueError(f"auto parameters need 0 < epsilon <= 0.05, got {epsilon}")
    if not (0.0 < epsilon_f < 1.0):
        raise ValueError(f"target infidelity must be in (0, 1), got {epsilon_f}")
    n = _ceil_tol(1.0 / math.sqrt(epsilon))
    m = _ceil_tol(-math.log2(epsilon_f))
    m = max(m, 1)
    if n - m < 1:
        raise InfeasibleError(
            f"n={n}, m={m} leaves no output pair; the target is out of one round's reach"
        )
    if math.log2(epsilon_f) < -(epsilon ** (-1.0 / 3.0)) - 1e-9:
        raise ValueError(
            f"per-round target {epsilon_f} is beyond the guaranteed reach 2^(-eps^(-1/3))"
        )
    return ProtocolParams(n=n, m=m)


def guaranteed_overhead(expected: float, delta: float) -> float:
    """Overhead achievable with probability >= 1 - delta by restarting on
    budget overrun: 2 * expected * log2(1/delta)."""
    if expected < 1.0:
        raise ValueError(f"expected overhead is always >= 1, got {expected}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"failure budget must be in (0, 1), got {delta}")
    return 2.0 * expected * math.log2(1.0 / delta)


# ---------------------------------------------------------------------------
# layer evaluation


def _passive_layer(eps_in: float, params: ProtocolParams, objective: str) -> PlanLayer:
    point = FidelityPoint.from_infidelity(eps_in)
    report = passive_performance(params, point)
    if objective == "exact":
        return PlanLayer(
            params=params,
            input_infidelity=eps_in,
            output_infidelity=report.pair_infidelity,
            p_accept=report.p_accept,
            expected_overhead=report.expected_overhead,
            accounting=EXACT,
        )
    # guaranteed: acceptance >= f^n, block fidelity >= 1 - 2^-m (f^-n - 1)
    fn = math.exp(params.n * point.log_f())
    block_inf = math.ldexp(math.expm1(-params.n * point.log_f()), -params.m)
    if block_inf >= 1.0:
        raise InfeasibleError("fidelity bound is vacuous at these parameters")
    eps_out = -math.expm1(math.log1p(-block_inf) / params.k)
    return PlanLayer(
        params=params,
        input_infidelity=eps_in,
        output_infidelity=eps_out,
        p_accept=fn,
        expected_overhead=params.n / (params.k * fn),
        accounting=GUARANTEED_BOUND,
    )


def _active_layer(eps_in: float, params: ProtocolParams) -> PlanLayer:
    report = active_bounds(params, IIDDepolarizing(n=params.n, epsilon=eps_in))
    # a table keyed by m-bit syndromes holds at most 2^m live entries, and the
    # stated fidelity bound degenerates once the correctable-mass bound dies;
    # the planner only certifies layers inside that regime
    if params.budget + 1 > 2**params.m:
        raise InfeasibleError("correction table larger than the syndrome space")
    if report.fidelity_lower_bound <= 0.0 or report.joint_lower <= 0.0:
        raise InfeasibleError("active bounds are vacuous at these parameters")
    block_inf = 1.0 - report.fidelity_lower_bound
    eps_out = -math.expm1(math.log1p(-block_inf) / params.k)
    return PlanLayer(
        params=params,
        input_infidelity=eps_in,
        output_infidelity=eps_out,
        p_accept=report.p_accept_lower,
        expected_overhead=report.expected_overhead_upper,
        accounting=GUARANTEED_BOUND,
    )


def _make_layer(eps_in: float, params: ProtocolParams, objective: str) -> PlanLayer:
    if params.is_passive:
        return _passive_layer(eps_in, params, objective)
    return _active_layer(eps_in, params)


# ---------------------------------------------------------------------------
# edge tables for the dynamic program


class _EdgeTable:
    """Best layer reaching any output level from one fixed input infidelity:
    candidate rounds sorted by their output infidelity with running cost
    minima, queried by searchsorted."""

    def __init__(self, eps_out, cost, n_arr, m_arr, budget_arr):
        order = np.lexsort((m_arr, n_arr, cost, eps_out))
        self.eps_out = eps_out[order]
        cost_sorted = cost[order]
        self.run_min = np.minimum.accumulate(cost_sorted)
        previous_best = np.concatenate(([np.inf], self.run_min[:-1]))
        improved = cost_sorted < previous_best
        marker = np.where(improved, np.arange(cost_sorted.size), 0)
        best_pos = np.maximum.accumulate(marker)
        self.best_n = n_arr[order][best_pos]
        self.best_m = m_arr[order][best_pos]
        self.best_budget = budget_arr[order][best_pos]

    def query(self, targets: np.ndarray):
        """(cost, n, m, budget) of the cheapest round with output <= target;
        cost is inf where no round reaches the target."""
        pos = np.searchsorted(self.eps_out, targets, side="right") - 1
        valid = pos >= 0
        pos = np.maximum(pos, 0)
        cost = np.where(valid, self.run_min[pos], np.inf)
        return cost, self.best_n[pos], self.best_m[pos], self.best_budget[pos]


def _passive_candidates(eps_in: float, n_max: int, objective: str):
    n_arr = np.concatenate([np.full(n - 1, n, dtype=np.int64) for n in range(2, n_max + 1)])
    m_arr = np.concatenate([np.arange(1, n, dtype=np.int64) for n in range(2, n_max + 1)])
    k_arr = n_arr - m_arr
    log_f = math.log1p(-eps_in)
    fn = np.exp(n_arr * log_f)
    one_minus_fn = -np.expm1(n_arr * log_f)
    if objective == "exact":
        denom = -np.expm1(-2.0 * math.log(2.0) * n_arr)
        r_acc = (np.exp2((m_arr + 2 * k_arr - 2 * n_arr).astype(float)) - np.exp2(-2.0 * n_arr)) / denom
        p_acc = fn + one_minus_fn * r_acc
        gap = one_minus_fn * (
            np.exp2((m_arr + 2 * k_arr - 2 * n_arr).astype(float)) - np.exp2((m_arr - 2 * n_arr).astype(float))
        ) / denom
        block_inf = gap / p_acc
        cost = n_arr / (k_arr * p_acc)
    else:
        block_inf = np.exp2(-m_arr.astype(float)) * np.expm1(-n_arr * log_f)
        cost = n_arr / (k_arr * fn)
    with np.errstate(invalid="ignore", divide="ignore"):
        eps_out = -np.expm1(np.log1p(-np.minimum(block_inf, 1.0)) / k_arr)
    usable = block_inf < 1.0
    budget_arr = np.full(n_arr.size, -1, dtype=np.int64)
    return _EdgeTable(eps_out[usable], cost[usable], n_arr[usable], m_arr[usable], budget_arr[usable])


def _budget_grid(model: IIDDepolarizing, budget_max: int) -> np.ndarray:
    """Candidate budgets: a log grid joined with the weight-class boundaries
    (complete classes are where the mass/size trade-off turns)."""
    points = {0, budget_max}
    value = 1.0
    while value <= budget_max:
        points.add(int(value))
        value *= 10.0 ** (1.0 / 8.0)
    cumulative = 0
    for w in range(model.n + 1):
        cumulative += model.class_count(w)
        if cumulative - 1 > budget_max:
            break
        points.add(cumulative - 1)
    return np.array(sorted(points), dtype=np.int64)


def _active_candidates(eps_in: float, n_max: int, budget_max: int):
    eps_out_all = []
    cost_all = []
    n_all = []
    m_all = []
    budget_all = []
    for n in range(2, n_max + 1):
        model = IIDDepolarizing(n=n, epsilon=eps_in)
        budgets = _budget_grid(model, budget_max)
        # q per budget via cumulative class masses with a pro-rata final class
        counts = np.array([model.class_count(w) for w in range(n + 1)], dtype=float)
        masses = np.array([model.class_mass(w) for w in range(n + 1)])
        strings = np.array([model.string_prob(w) for w in range(n + 1)])
        cum_counts = np.concatenate(([0.0], np.cumsum(counts)))
        cum_masses = np.concatenate(([0.0], np.cumsum(masses)))
        need = (budgets + 1).astype(float)
        w_idx = np.searchsorted(cum_counts, need, side="left") - 1
        w_idx = np.clip(w_idx, 0, n)
        q = cum_masses[w_idx] + (need - cum_counts[w_idx]) * strings[w_idx]
        q = np.minimum(q, 1.0)
        fn = math.exp(n * math.log1p(-eps_in))
        m_arr = np.arange(1, n, dtype=np.int64)
        two_pow_neg_m = np.exp2(-m_arr.astype(float))
        leak = two_pow_neg_m[:, None] * (budgets + 1)[None, :]
        block_inf = leak * (1.0 / q - 1.0)[None, :]
        joint_lower = q[None, :] - two_pow_neg_m[:, None] * budgets[None, :] * (q - fn)[None, :]
        # certify only layers whose table fits the syndrome space and whose
        # correctable-mass bound is alive; see _active_layer
        fits = (budgets + 1)[None, :] <= np.exp2(m_arr.astype(float))[:, None]
        usable = (block_inf < 1.0) & (joint_lower > 0.0) & fits
        if not usable.any():
            continue
        k_arr = (n - m_arr).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            eps_out = -np.expm1(np.log1p(-np.minimum(block_inf, 1.0)) / k_arr[:, None])
        cost = (n / (k_arr[:, None] * q[None, :])) * np.ones_like(block_inf)
        m_grid = np.broadcast_to(m_arr[:, None], block_inf.shape)
        b_grid = np.broadcast_to(budgets[None, :], block_inf.shape)
        eps_out_all.append(eps_out[usable])
        cost_all.append(cost[usable])
        n_all.append(np.full(int(usable.sum()), n, dtype=np.int64))
        m_all.append(m_grid[usable])
        budget_all.append(b_grid[usable])
    if not eps_out_all:
        return None
    return _EdgeTable(
        np.concatenate(eps_out_all),
        np.concatenate(cost_all),
        np.concatenate(n_all),
        np.concatenate(m_all),
        np.concatenate(budget_all),
    )


# ---------------------------------------------------------------------------
# strategies


def _plan_dp(
    epsilon0: float,
    target: float,
    delta: float,
    n_max: int,
    active_budget_max: int | None,
    objective: str,
    grid_nodes: int,
) -> ConcatenationPlan:
    nodes = np.geomspace(epsilon0, target, num=grid_nodes)
    nodes[0] = epsilon0
    nodes[-1] = target
    dp = np.full(grid_nodes, np.inf)
    dp[0] = 1.0
    pred = np.full(grid_nodes, -1, dtype=np.int64)
    choice_n = np.zeros(grid_nodes, dtype=np.int64)
    choice_m = np.zeros(grid_nodes, dtype=np.int64)
    choice_budget = np.full(grid_nodes, -1, dtype=np.int64)

    for i in range(grid_nodes - 1):
        if not np.isfinite(dp[i]):
            continue
        tables = [_passive_candidates(nodes[i], n_max, objective)]
        if i == 0 and active_budget_max is not None:
            active = _active_candidates(nodes[0], n_max, active_budget_max)
            if active is not None:
                tables.append(active)
        targets = nodes[i + 1 :]
        for table in tables:
            cost, best_n, best_m, best_budget = table.query(targets)
            candidate = dp[i] * cost
            improve = candidate < dp[i + 1 :]
            sel = np.where(improve)[0] + i + 1
            dp[sel] = candidate[improve]
            pred[sel] = i
            choice_n[sel] = best_n[improve]
            choice_m[sel] = best_m[improve]
            choice_budget[sel] = best_budget[improve]

    if not np.isfinite(dp[-1]):
        raise InfeasibleError(
            f"no concatenation with n <= {n_max} reaches {target} from {epsilon0}"
        )

    # rebuild the chain; layer reports are evaluated at their assumed inputs
    path = []
    node = grid_nodes - 1
    while node != 0:
        path.append(node)
        node = pred[node]
    path.reverse()
    layers = []
    source = 0
    for node in path:
        budget = int(choice_budget[node])
        params = ProtocolParams(
            n=int(choice_n[node]),
            m=int(choice_m[node]),
            budget=None if budget < 0 else budget,
        )
        layers.append(_make_layer(float(nodes[source]), params, objective))
        source = node
    expected = math.prod(layer.expected_overhead for layer in layers)
    return ConcatenationPlan(
        layers=tuple(layers),
        final_infidelity=layers[-1].output_infidelity,
        expected_overhead=expected,
        delta=delta,
        guaranteed_overhead=guaranteed_overhead(expected, delta),
    )


def _plan_recipe(epsilon0: float, target: float, delta: float, objective: str) -> ConcatenationPlan:
    if epsilon0 > 0.0006:
        raise ValueError(
            f"the fixed recipe is guaranteed for starting infidelity <= 0.0006, got {epsilon0}"
        )
    eps_pre = math.log2(1.0 / target) ** -3.0  # ideal input of the final round
    layers = []
    eps = epsilon0
    while eps > eps_pre:
        eps_next = max(2.0 ** (-(eps ** (-1.0 / 3.0))), eps_pre)
        layer = _make_layer(eps, auto_params(eps, eps_next), objective)
        if layer.output_infidelity > eps_next:
            raise InfeasibleError("recipe layer failed to reach its scheduled target")
        layers.append(layer)
        eps = eps_next
    final = _make_layer(eps, auto_params(eps, target), objective)
    if final.output_infidelity > target:
        raise InfeasibleError("final recipe layer failed to reach the target")
    layers.append(final)
    expected = math.prod(layer.expected_overhead for layer in layers)
    return ConcatenationPlan(
        layers=tuple(layers),
        final_infidelity=layers[-1].output_infidelity,
        expected_overhead=expected,
        delta=delta,
        guaranteed_overhead=guaranteed_overhead(expected, delta),
    )


def plan_concatenation(
    epsilon0: float,
    target: float,
    *,
    delta: float = 0.01,
    n_max: int = 300,
    active_budget_max: int | None = None,
    objective: str = "exact",
    strategy: str = "dp",
    grid_nodes: int = DEFAULT_GRID_NODES,
) -> ConcatenationPlan:
    """Feasible concatenation plan reaching ``target`` from ``epsilon0``.

    objective "exact" scores passive layers with the exact closed forms,
    "bound" with their guaranteed bounds; an active first layer (enabled by
    ``active_budget_max``) is always scored with its guaranteed bounds.
    strategy "dp" searches a log-spaced infidelity grid; "recipe" follows the
    fixed auto-parameter schedule (passive only).
    """
    if not (0.0 < target < 0.5) or not (0.0 < epsilon0 < 0.5):
        raise ValueError("infidelities must be in (0, 0.5)")
    if objective not in ("exact", "bound"):
        raise ValueError(f"objective must be 'exact' or 'bound', got {objective!r}")
    if strategy not in ("dp", "recipe"):
        raise ValueError(f"strategy must be 'dp' or 'recipe', got {strategy!r}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"failure budget must be in (0, 1), got {delta}")
    if epsilon0 <= target * (1.0 + DEGENERATE_GRACE):
        # already at (or indistinguishably close to) the target
        return ConcatenationPlan(
            layers=(),
            final_infidelity=epsilon0,
            expected_overhead=1.0,
            delta=delta,
            guaranteed_overhead=guaranteed_overhead(1.0, delta),
        )
    if strategy == "recipe":
        return _plan_recipe(epsilon0, target, delta, objective)
    if grid_nodes < 2:
        raise ValueError("need at least two grid nodes")
    return _plan_dp(epsilon0, target, delta, n_max, active_budget_max, objective, grid_nodes)


# ---------------------------------------------------------------------------
# retry-process simulation


def _layer_samples(plan: ConcatenationPlan, rng: np.random.Generator, size: int) -> np.ndarray:
    """Realized overheads of the repeat-until-success process: the product
    over layers of (retries * n_i / k_i) with independent geometric retries."""
    realized = np.ones(size)
    for layer in plan.layers:
        retries = rng.geometric(layer.p_accept, size=size)
        realized *= retries * layer.params.n / layer.params.k
    return realized


def simulate_retries(plan: ConcatenationPlan, runs: int, seed: int) -> np.ndarray:
    """Sample realized overheads of the plan; their mean converges to
    ``plan.expected_overhead``."""
    if runs < 1:
        raise ValueError("need at least one run")
    rng = np.random.default_rng(seed)
    return _layer_samples(plan, rng, runs)


def simulate_budget_restart(plan: ConcatenationPlan, delta: float, runs: int, seed: int):
    """Simulate the budget-restart policy behind the guaranteed overhead: each
    attempt aborts once it consumes 2x the expected overhead, and up to
    ceil(log2(1/delta)) attempts are made.

    Returns ``(totals, succeeded)``; the failure fraction is <= delta in
    expectation and a failed run is exactly the event of needing more than
    ``guaranteed_overhead(expected, delta)``.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"failure budget must be in (0, 1), got {delta}")
    if runs < 1:
        raise ValueError("need at least one run")
    rng = np.random.default_rng(seed)
    attempts = max(1, math.ceil(math.log2(1.0 / delta) - 1e-12))
    budget = 2.0 * plan.expected_overhead
    totals = np.zeros(runs)
    succeeded = np.zeros(runs, dtype=bool)
    for _ in range(attempts):
        pending = ~succeeded
        if not pending.any():
            break
        draws = _layer_samples(plan, rng, int(pending.sum()))
        ok = draws <= budget
        consumed = np.where(ok, draws, budget)
        totals[pending] += consumed
        idx = np.where(pending)[0]
        succeeded[idx[ok]] = True
    return totals, succeeded
