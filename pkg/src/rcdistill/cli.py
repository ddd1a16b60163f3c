"""Command-line front end: single-round evaluation, concatenation planning,
weight-chain studies, Monte Carlo runs, repeater schemes and grid sweeps.

Every run emits a single document (JSON or CSV) that echoes the fully
resolved configuration, so any published number can be reproduced from its
own output; numeric fields are serialized with 17 significant digits and
randomized commands either take an explicit seed or generate one and echo
it.  Exit codes: 0 ok, 2 bad configuration, 3 infeasible request, 4
internal error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from itertools import product

import numpy as np

from . import __version__
from .analytic import FidelityPoint, ProtocolParams, passive_performance
from .errors import InfeasibleError
from .markov import evolve, finite_depth_performance, initial_weight_distribution, transition_matrix
from .mc_oracle import estimate_active, estimate_finite_depth, estimate_passive
from .pauli_dist import GateNoise, IIDDepolarizing, active_bounds, gate_noise_amplitude_damping, gate_noise_depolarizing
from .planner import plan_concatenation
from .repeater import MAX_LEVELS, RepeaterPlan, evaluate_scheme, heuristic_search

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

DEFAULT_ROW_CAP = 10**6


# ---------------------------------------------------------------------------
# serialization: 17 significant digits, deterministic layout


def _fmt_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _to_json(value, out: io.StringIO):
    if value is None:
        out.write("null")
    elif isinstance(value, str):
        out.write(json.dumps(value))
    elif isinstance(value, (bool, int, float, np.integer, np.floating)):
        out.write(_fmt_number(value))
    elif isinstance(value, dict):
        out.write("{")
        for index, (key, item) in enumerate(value.items()):
            if index:
                out.write(", ")
            out.write(json.dumps(str(key)))
            out.write(": ")
            _to_json(item, out)
        out.write("}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        out.write("[")
        for index, item in enumerate(value):
            if index:
                out.write(", ")
            _to_json(item, out)
        out.write("]")
    else:
        raise TypeError(f"cannot serialize {type(value)!r}")


def render_json(document: dict) -> str:
    out = io.StringIO()
    _to_json(document, out)
    out.write("\n")
    return out.getvalue()


def render_csv(config: dict, columns: list[str], rows: list[list]) -> str:
    out = io.StringIO()
    cfg = io.StringIO()
    _to_json(config, cfg)
    out.write(f"# config: {cfg.getvalue()}\n")
    out.write(f"# version: {__version__}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join("" if v is None else (v if isinstance(v, str) else _fmt_number(v)) for v in row) + "\n")
    return out.getvalue()


def parse_csv_document(text: str) -> tuple[dict, list[str], list[list[float]]]:
    """Inverse of render_csv: (config, columns, rows with numeric cells)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# config: "):
        raise ValueError("missing config header")
    config = json.loads(lines[0][len("# config: ") :])
    body = [line for line in lines[1:] if not line.startswith("#")]
    columns = body[0].split(",") if body else []
    rows = []
    for line in body[1:]:
        if not line:
            continue
        cells = []
        for cell in line.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(cells)
    return config, columns, rows


def _flatten_for_csv(results: dict) -> tuple[list[str], list[list]]:
    """One-row CSV from a flat dict; list-valued fields become indexed columns."""
    columns = []
    row = []
    for key, value in results.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            for index, item in enumerate(value):
                columns.append(f"{key}_{index}")
                row.append(item)
        else:
            columns.append(key)
            row.append(value)
    return columns, [row]


# ---------------------------------------------------------------------------
# configuration handling


class ConfigError(Exception):
    pass


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def resolve_config(defaults: dict, file_config: dict, cli_values: dict) -> dict:
    """defaults <- config file <- explicitly given flags; unknown keys rejected."""
    config = dict(defaults)
    for key, value in file_config.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}")
        config[key] = value
    for key, value in cli_values.items():
        if value is not None:
            config[key] = value
    return config


def _require(config: dict, *keys: str):
    missing = [key for key in keys if config.get(key) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + k.replace('_', '-') for k in missing)}")


def _resolve_seed(config: dict) -> dict:
    if config.get("seed") is None:
        config["seed"] = int.from_bytes(os.urandom(8), "little") >> 1
        print(f"generated seed: {config['seed']}", file=sys.stderr)
    return config


def _epsilon_from(config: dict) -> float:
    if config.get("epsilon") is not None and config.get("fidelity") is not None:
        raise ConfigError("give either --epsilon or --fidelity, not both")
    if config.get("epsilon") is not None:
        return float(config["epsilon"])
    if config.get("fidelity") is not None:
        return 1.0 - float(config["fidelity"])
    raise ConfigError("one of --epsilon / --fidelity is required")


def _gate_noise_from(config: dict) -> GateNoise | None:
    given = [name for name in ("lam", "gamma") if config.get(name) is not None]
    if len(given) > 1:
        raise ConfigError("give at most one of --lam / --gamma")
    if config.get("lam") is not None:
        return gate_noise_depolarizing(float(config["lam"]))
    if config.get("gamma") is not None:
        return gate_noise_amplitude_damping(float(config["gamma"]))
    return None


# ---------------------------------------------------------------------------
# commands


def _cmd_evaluate(config: dict):
    epsilon = _epsilon_from(config)
    _require(config, "n", "m")
    if config.get("budget") is None:
        params = ProtocolParams(n=int(config["n"]), m=int(config["m"]))
        report = passive_performance(params, FidelityPoint.from_infidelity(epsilon))
        results = {
            "n": params.n,
            "m": params.m,
            "k": params.k,
            "epsilon": epsilon,
            "p_accept": report.p_accept,
            "p_accept_and_phi": report.p_accept_and_phi,
            "block_fidelity": report.block_fidelity,
            "pair_infidelity": report.pair_infidelity,
            "expected_overhead": report.expected_overhead,
        }
    else:
        params = ProtocolParams(n=int(config["n"]), m=int(config["m"]), budget=int(config["budget"]))
        report = active_bounds(params, IIDDepolarizing(n=params.n, epsilon=epsilon))
        results = {
            "n": params.n,
            "m": params.m,
            "k": params.k,
            "epsilon": epsilon,
            "budget": params.budget,
            "q": report.q,
            "p_accept_lower": report.p_accept_lower,
            "p_accept_upper": report.p_accept_upper,
            "joint_lower": report.joint_lower,
            "fidelity_lower_bound": report.fidelity_lower_bound,
            "expected_overhead_upper": report.expected_overhead_upper,
        }
    return results, _flatten_for_csv(results)


def _cmd_plan(config: dict):
    _require(config, "epsilon0", "target")
    plan = plan_concatenation(
        float(config["epsilon0"]),
        float(config["target"]),
        delta=float(config["delta"]),
        n_max=int(config["n_max"]),
        active_budget_max=None if config["active_e_max"] is None else int(config["active_e_max"]),
        objective=str(config["objective"]),
        strategy=str(config["strategy"]),
        grid_nodes=int(config["grid_nodes"]),
    )
    summary = {
        "final_infidelity": plan.final_infidelity,
        "expected_overhead": plan.expected_overhead,
        "delta": plan.delta,
        "guaranteed_overhead": plan.guaranteed_overhead,
        "layer_count": plan.layer_count,
        "peak_memory_pairs": plan.peak_memory_pairs,
    }
    layers = [
        {
            "layer": index + 1,
            "n": layer.params.n,
            "m": layer.params.m,
            "k": layer.params.k,
            "budget": -1 if layer.params.budget is None else layer.params.budget,
            "input_infidelity": layer.input_infidelity,
            "output_infidelity": layer.output_infidelity,
            "p_accept": layer.p_accept,
            "expected_overhead": layer.expected_overhead,
            "accounting": layer.accounting,
        }
        for index, layer in enumerate(plan.layers)
    ]
    results = dict(summary)
    results["layers"] = layers
    columns = list(layers[0].keys()) + list(summary.keys()) if layers else list(summary.keys())
    rows = [list(layer.values()) + list(summary.values()) for layer in layers] or [list(summary.values())]
    return results, (columns, rows)


def _cmd_markov(config: dict):
    _require(config, "n", "m", "epsilon", "gates")
    n = int(config["n"])
    noise = _gate_noise_from(config)
    matrix = transition_matrix(n, noise)
    dist = evolve(initial_weight_distribution(n, float(config["epsilon"])), matrix, int(config["gates"]))
    report = finite_depth_performance(dist, int(config["m"]))
    effective = noise if noise is not None else GateNoise(1.0, 0.0, 0.0)
    results = {
        "n": n,
        "m": int(config["m"]),
        "epsilon": float(config["epsilon"]),
        "gates": int(config["gates"]),
        "f0": effective.f0,
        "f1": effective.f1,
        "f2": effective.f2,
        "p_accept": report.p_accept,
        "p_accept_and_phi": report.p_accept_and_phi,
        "block_fidelity": report.block_fidelity,
        "pair_infidelity": report.pair_infidelity,
        "weights": list(dist.probs),
    }
    return results, _flatten_for_csv(results)


def _cmd_mc(config: dict):
    _require(config, "n", "m", "epsilon", "trials")
    _resolve_seed(config)
    mode = str(config["mode"])
    n, m = int(config["n"]), int(config["m"])
    epsilon, trials, seed = float(config["epsilon"]), int(config["trials"]), int(config["seed"])
    results = {"mode": mode, "n": n, "m": m, "epsilon": epsilon, "trials": trials, "seed": seed}
    if mode == "passive":
        accept, joint = estimate_passive(n, m, epsilon, trials, seed)
    elif mode == "active":
        _require(config, "budget")
        results["budget"] = int(config["budget"])
        accept, joint = estimate_active(n, m, int(config["budget"]), epsilon, trials, seed)
    elif mode == "finite-depth":
        _require(config, "gates")
        lam = float(config["lam"]) if config.get("lam") is not None else 0.0
        results["gates"] = int(config["gates"])
        results["lam"] = lam
        accept, joint, histogram = estimate_finite_depth(n, m, int(config["gates"]), epsilon, trials, seed, lam)
        results["weight_counts"] = [int(c) for c in histogram]
    else:
        raise ConfigError(f"unknown mc mode {mode!r}")
    results["p_accept_hat"] = accept.p_hat
    results["p_accept_stderr"] = accept.stderr
    results["p_joint_hat"] = joint.p_hat
    results["p_joint_stderr"] = joint.stderr
    if accept.p_hat > 0.0:
        ratio = joint.p_hat / accept.p_hat
        results["block_fidelity_hat"] = ratio
        results["pair_infidelity_hat"] = -math.expm1(math.log(ratio) / (n - m)) if ratio > 0 else 1.0
    return results, _flatten_for_csv(results)


def _cmd_repeater(config: dict):
    _require(config, "link_epsilon", "target")
    link = float(config["link_epsilon"])
    target = float(config["target"])
    levels = int(config["levels"])
    if config.get("triple") is not None:
        try:
            n, k, n_prime = (int(part) for part in str(config["triple"]).split(","))
        except ValueError as exc:
            raise ConfigError("--triple expects n,k,nprime") from exc
        per_level: list[ProtocolParams | None] = [None] * (levels + 1)
        if levels >= 1:
            per_level[1] = ProtocolParams(n=n, m=n - k)
            for i in range(2, levels + 1):
                per_level[i] = ProtocolParams(n=n_prime, m=1)
        plan = RepeaterPlan(levels=levels, link_infidelity=link, per_level=tuple(per_level))
    else:
        n, k, n_prime, plan = heuristic_search(link, target, n_cap=int(config["n_cap"]), levels=levels)
    report = evaluate_scheme(plan)
    if report.end_to_end_infidelity > target:
        raise InfeasibleError(
            f"scheme reaches {report.end_to_end_infidelity}, above the target {target}"
        )
    results = {
        "n": n,
        "k": k,
        "n_prime": n_prime,
        "levels": levels,
        "link_epsilon": link,
        "target": target,
        "end_to_end_infidelity": report.end_to_end_infidelity,
        "end_to_end_overhead": report.end_to_end_overhead,
        "overhead_per_segment": report.overhead_per_segment,
        "level_infidelities": list(report.level_infidelities),
    }
    return results, _flatten_for_csv(results)


# ---------------------------------------------------------------------------
# sweeps


_AXIS_TYPES = {
    "n": int,
    "m": int,
    "m_frac": float,
    "epsilon": float,
    "fidelity": float,
    "budget": int,
    "gates": int,
    "lam": float,
    "gamma": float,
}

_SWEEP_OPS = {
    "passive": ("n", "m", "m_frac", "epsilon", "fidelity"),
    "active": ("n", "m", "m_frac", "epsilon", "fidelity", "budget"),
    "finite_depth": ("n", "m", "m_frac", "epsilon", "gates", "lam", "gamma"),
}


def _parse_axis_values(name: str, spec: str) -> list:
    """Axis value lists: 'v1,v2,...', 'start:stop:step' or 'log:start:stop:count'."""
    cast = _AXIS_TYPES[name]
    spec = spec.strip()
    if spec == "":
        return []
    if spec.startswith("log:"):
        try:
            _, lo, hi, count = spec.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
        except ValueError as exc:
            raise ConfigError(f"bad log axis {spec!r}") from exc
        values = np.geomspace(lo, hi, num=count)
        return [cast(round(v)) if cast is int else float(v) for v in values]
    if ":" in spec:
        try:
            lo, hi, step = (float(part) for part in spec.split(":"))
        except ValueError as exc:
            raise ConfigError(f"bad range axis {spec!r}") from exc
        if step <= 0:
            raise ConfigError("axis step must be positive")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [cast(round(lo + i * step)) if cast is int else lo + i * step for i in range(count)]
    return [cast(part) if cast is not int else int(part) for part in spec.split(",")]


def _round_m(frac: float, n: int, mode: str) -> int:
    raw = frac * n
    if mode == "floor":
        m = math.floor(raw)
    elif mode == "nearest":
        m = round(raw)
    else:
        m = math.ceil(raw)
    return max(1, min(n - 1, m))


def _sweep_axes(config: dict) -> tuple[list[str], list[list]]:
    axes = {}
    for entry in config["axis"] or []:
        if "=" not in entry:
            raise ConfigError(f"axis must look like name=values, got {entry!r}")
        name, spec = entry.split("=", 1)
        name = name.strip()
        if name not in _AXIS_TYPES:
            raise ConfigError(f"unknown axis {name!r}")
        axes[name] = _parse_axis_values(name, spec)
    fixed = {}
    for entry in config["fix"] or []:
        if "=" not in entry:
            raise ConfigError(f"fix must look like name=value, got {entry!r}")
        name, raw = entry.split("=", 1)
        name = name.strip()
        if name not in _AXIS_TYPES:
            raise ConfigError(f"unknown parameter {name!r}")
        fixed[name] = _AXIS_TYPES[name](raw)
    return axes, fixed


def _cmd_sweep(config: dict):
    op = str(config["op"])
    if op not in _SWEEP_OPS:
        raise ConfigError(f"unknown sweep op {op!r}; choose from {sorted(_SWEEP_OPS)}")
    axes, fixed = _sweep_axes(config)
    allowed = set(_SWEEP_OPS[op])
    for name in list(axes) + list(fixed):
        if name not in allowed:
            raise ConfigError(f"parameter {name!r} does not apply to op {op!r}")
    axis_names = list(axes.keys())
    grid_sizes = [len(axes[name]) for name in axis_names]
    total = math.prod(grid_sizes) if grid_sizes else 0
    row_cap = int(config["max_rows"])
    if total > row_cap:
        raise ConfigError(f"grid has {total} rows, above the cap {row_cap}")
    m_round = str(config["m_round"])

    def point_params(point: dict):
        merged = dict(fixed)
        merged.update(point)
        n = int(merged["n"])
        if "m" in merged:
            m = int(merged["m"])
        elif "m_frac" in merged:
            m = _round_m(float(merged["m_frac"]), n, m_round)
        else:
            raise ConfigError("need an m or m_frac parameter")
        if "epsilon" in merged:
            epsilon = float(merged["epsilon"])
        elif "fidelity" in merged:
            epsilon = 1.0 - float(merged["fidelity"])
        else:
            raise ConfigError("need an epsilon or fidelity parameter")
        return merged, n, m, epsilon

    columns: list[str]
    if op == "passive":
        columns = ["n", "m", "k", "epsilon", "p_accept", "p_accept_and_phi", "block_fidelity", "pair_infidelity", "expected_overhead"]
    elif op == "active":
        columns = ["n", "m", "k", "epsilon", "budget", "q", "p_accept_lower", "p_accept_upper", "fidelity_lower_bound", "joint_lower", "expected_overhead_upper"]
    else:
        columns = ["n", "m", "k", "epsilon", "gates", "f0", "f1", "f2", "p_accept", "p_accept_and_phi", "block_fidelity", "pair_infidelity"]

    rows = []
    transition_cache: dict[tuple, object] = {}
    for combo in product(*(axes[name] for name in axis_names)):
        point = dict(zip(axis_names, combo))
        merged, n, m, epsilon = point_params(point)
        if op == "passive":
            report = passive_performance(ProtocolParams(n=n, m=m), FidelityPoint.from_infidelity(epsilon))
            rows.append([n, m, n - m, epsilon, report.p_accept, report.p_accept_and_phi, report.block_fidelity, report.pair_infidelity, report.expected_overhead])
        elif op == "active":
            if "budget" not in merged:
                raise ConfigError("active sweeps need a budget parameter")
            budget = int(merged["budget"])
            report = active_bounds(ProtocolParams(n=n, m=m, budget=budget), IIDDepolarizing(n=n, epsilon=epsilon))
            rows.append([n, m, n - m, epsilon, budget, report.q, report.p_accept_lower, report.p_accept_upper, report.fidelity_lower_bound, report.joint_lower, report.expected_overhead_upper])
        else:
            if "gates" not in merged:
                raise ConfigError("finite_depth sweeps need a gates parameter")
            gates = int(merged["gates"])
            noise = _gate_noise_from(merged)
            effective = noise if noise is not None else GateNoise(1.0, 0.0, 0.0)
            key = (n, effective.f0, effective.f1, effective.f2)
            if key not in transition_cache:
                transition_cache[key] = transition_matrix(n, effective)
            dist = evolve(initial_weight_distribution(n, epsilon), transition_cache[key], gates)
            report = finite_depth_performance(dist, m)
            rows.append([n, m, n - m, epsilon, gates, effective.f0, effective.f1, effective.f2, report.p_accept, report.p_accept_and_phi, report.block_fidelity, report.pair_infidelity])
    results = {"columns": columns, "rows": rows}
    return results, (columns, rows)


# ---------------------------------------------------------------------------
# argument parsing and dispatch

_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "plan": _cmd_plan,
    "markov": _cmd_markov,
    "mc": _cmd_mc,
    "repeater": _cmd_repeater,
    "sweep": _cmd_sweep,
}

_DEFAULTS = {
    "evaluate": {"n": None, "m": None, "epsilon": None, "fidelity": None, "budget": None},
    "plan": {
        "epsilon0": None,
        "target": None,
        "delta": 0.01,
        "n_max": 300,
        "active_e_max": None,
        "objective": "exact",
        "strategy": "dp",
        "grid_nodes": 512,
    },
    "markov": {"n": None, "m": None, "epsilon": None, "gates": None, "lam": None, "gamma": None},
    "mc": {
        "mode": "passive",
        "n": None,
        "m": None,
        "epsilon": None,
        "trials": None,
        "seed": None,
        "budget": None,
        "gates": None,
        "lam": None,
    },
    "repeater": {"link_epsilon": None, "target": None, "n_cap": 100, "levels": MAX_LEVELS, "triple": None},
    "sweep": {"op": None, "axis": None, "fix": None, "m_round": "ceil", "max_rows": DEFAULT_ROW_CAP},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcdistill", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rcdistill {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default="-", help="output path, '-' for stdout")
        p.add_argument("--config", default=None, help="JSON config file; flags override its keys")

    p = sub.add_parser("evaluate", help="closed-form statistics of one round")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--budget", type=int, help="report syndrome-decoding bounds for this budget")

    p = sub.add_parser("plan", help="concatenation plan reaching a target infidelity")
    add_common(p)
    p.add_argument("--epsilon0", type=float)
    p.add_argument("--target", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--active-e-max", dest="active_e_max", type=int)
    p.add_argument("--objective", choices=("exact", "bound"))
    p.add_argument("--strategy", choices=("dp", "recipe"))
    p.add_argument("--grid-nodes", dest="grid_nodes", type=int)

    p = sub.add_parser("markov", help="weight-chain statistics after a number of gates")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gates", type=int)
    p.add_argument("--lam", type=float, help="two-qubit depolarizing strength")
    p.add_argument("--gamma", type=float, help="amplitude damping parameter")

    p = sub.add_parser("mc", help="Monte Carlo trial simulation")
    add_common(p)
    p.add_argument("--mode", choices=("passive", "active", "finite-depth"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--gates", type=int)
    p.add_argument("--lam", type=float)

    p = sub.add_parser("repeater", help="nested repeater scheme evaluation/search")
    add_common(p)
    p.add_argument("--link-epsilon", dest="link_epsilon", type=float)
    p.add_argument("--target", type=float)
    p.add_argument("--n-cap", dest="n_cap", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--triple", help="evaluate a fixed n,k,nprime instead of searching")

    p = sub.add_parser("sweep", help="tabulate an operation over a parameter grid")
    add_common(p)
    p.add_argument("--op", choices=tuple(_SWEEP_OPS))
    p.add_argument("--axis", action="append", help="axis spec name=v1,v2 | name=a:b:step | name=log:a:b:count")
    p.add_argument("--fix", action="append", help="fixed parameter name=value")
    p.add_argument("--m-round", dest="m_round", choices=("ceil", "floor", "nearest"))
    p.add_argument("--max-rows", dest="max_rows", type=int)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    common = {"format": args.format, "output": args.output}
    file_config = _load_config_file(args.config) if args.config else {}
    cli_values = {
        key: getattr(args, key)
        for key in _DEFAULTS[command]
        if hasattr(args, key)
    }
    config = resolve_config(_DEFAULTS[command], file_config, cli_values)
    results, (columns, rows) = _COMMANDS[command](config)
    echoed = {"command": command, **config, **common}
    if args.format == "json":
        text = render_json({"config": echoed, "results": results, "version": __version__})
    else:
        text = render_csv(echoed, columns, rows)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SystemExit:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
