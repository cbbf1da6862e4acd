"""Batch experiment harness: tours, covers, support reports, gate counts.

Every run writes machine-readable artifacts into --out: a convergence
CSV (schema trial,evaluation,expectation,best_so_far,feasible), a JSON
summary embedding the fully resolved configuration, and a PNG rendering
of the convergence curves. Rerunning the same configuration reproduces
the CSV body byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .ansatz import (
    build_mvc_ansatz,
    build_ry_baseline,
    build_tsp_proposed1,
    build_tsp_proposed4,
)
from .oracle import brute_force_min, enumerate_feasible, support, verify_counts
from .problems import (
    Graph,
    builtin6_graph,
    complete_graph,
    load_graph,
    mvc_cost,
    spanning_tree,
    tour_length,
    tsp_cost,
)
from .vqe import ConvergenceRecord, ExpectationMode, OptimizerConfig, run_vqe

_CSV_HEADER = "trial,evaluation,expectation,best_so_far,feasible"


def _parse_mode(text: str) -> ExpectationMode:
    if text == "exact":
        return ExpectationMode.exact()
    if text.startswith("shots:"):
        shots = int(text.split(":", 1)[1])
        return ExpectationMode.sampled(shots)
    raise ValueError(f"mode must be 'exact' or 'shots:K', got {text!r}")


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _write_convergence_csv(
    path: Path, records: Sequence[ConvergenceRecord], config: dict
) -> None:
    # the output directory is not part of the experiment identity
    config = {k: v for k, v in config.items() if k != "out"}
    lines = [f"# config {json.dumps(config, sort_keys=True)}", _CSV_HEADER]
    for rec in records:
        best = float("inf")
        for ev in rec.evaluations:
            best = min(best, ev.value)
            lines.append(
                f"{rec.trial_id},{ev.index},{ev.value:.12g},{best:.12g},"
                f"{int(ev.argmax_feasible)}"
            )
    path.write_text("\n".join(lines) + "\n")


def _graph_json(graph: Graph) -> dict:
    return {
        "n_vertices": graph.n_vertices,
        "edges": [[u, v, w] for u, v, w in graph.edges],
    }


def _run_and_report(
    args: argparse.Namespace,
    problem: str,
    graph: Graph,
    circuit,
    cost,
    answer_objective,
    optimal_objective: float,
    optimal_answers: list[tuple],
) -> int:
    mode = _parse_mode(args.mode)
    optimizer = OptimizerConfig(
        kind=args.optimizer, max_evals=args.max_evals, tolerance=args.tolerance
    )
    records = run_vqe(
        circuit,
        cost,
        optimizer,
        mode,
        trials=args.trials,
        init_seed=args.seed,
        threads=args.threads,
    )
    min_cost, _ = brute_force_min(cost)

    trials_json = []
    n_feasible = n_optimal = 0
    for rec in records:
        feasible = rec.answer is not None
        objective = answer_objective(rec.answer) if feasible else None
        optimal = feasible and objective <= optimal_objective + 1e-9
        n_feasible += feasible
        n_optimal += optimal
        trials_json.append(
            {
                "trial": rec.trial_id,
                "best_expectation": rec.best_expectation,
                "n_evaluations": len(rec.evaluations),
                "answer": list(rec.answer) if feasible else None,
                "answer_objective": objective,
                "feasible": feasible,
                "optimal": optimal,
                "elapsed_seconds": rec.elapsed_seconds,
            }
        )
        tag = "optimal" if optimal else ("feasible" if feasible else "infeasible")
        print(
            f"trial {rec.trial_id}: best expectation {rec.best_expectation:.6f}, "
            f"answer {rec.answer}, {tag}"
        )

    config = _config_echo(args)
    summary = {
        "command": problem,
        "config": config,
        "graph": _graph_json(graph),
        "oracle": {
            "min_cost": min_cost,
            "optimal_objective": optimal_objective,
            "optimal_answers": [list(a) for a in optimal_answers],
        },
        "trials": trials_json,
        "n_feasible": n_feasible,
        "n_optimal": n_optimal,
    }

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "convergence.csv"
    _write_convergence_csv(csv_path, records, config)
    json_path = out / "summary.json"
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    from .plots import plot_convergence  # deferred: pulls in matplotlib

    fig_path = plot_convergence(
        records,
        out / "convergence.png",
        title=f"{problem} / {args.ansatz} / {args.mode}",
        reference=min_cost,
    )
    print(
        f"{n_optimal}/{len(records)} trials optimal, {n_feasible}/{len(records)} "
        f"feasible; brute-force optimum {optimal_objective:.6g}"
    )
    print(f"wrote {csv_path}, {json_path}, {fig_path}")
    return 0


def cmd_tsp(args: argparse.Namespace) -> int:
    if args.graph:
        graph = load_graph(args.graph)
    else:
        graph = complete_graph(args.cities, seed=args.seed)
    n = graph.n_vertices
    if args.ansatz == "proposed1":
        circuit = build_tsp_proposed1(n)
    elif args.ansatz == "proposed4":
        circuit = build_tsp_proposed4(n)
    else:
        circuit = build_ry_baseline(n * n, args.depth)
    cost = tsp_cost(graph, args.penalty)
    feasible = enumerate_feasible("tsp", graph)
    optimal_objective = min(feasible.values())
    optimal = [
        a
        for z, obj in sorted(feasible.items())
        if obj <= optimal_objective + 1e-9
        for a in [cost.decode(z)]
    ]
    return _run_and_report(
        args,
        "tsp",
        graph,
        circuit,
        cost,
        lambda tour: tour_length(graph, tour),
        optimal_objective,
        optimal,
    )


def _mvc_graph(source: str) -> Graph:
    return builtin6_graph() if source == "builtin6" else load_graph(source)


def cmd_mvc(args: argparse.Namespace) -> int:
    graph = _mvc_graph(args.graph)
    if args.ansatz == "proposed":
        circuit = build_mvc_ansatz(graph, spanning_tree(graph))
    else:
        circuit = build_ry_baseline(graph.n_vertices, args.depth)
    cost = mvc_cost(graph, args.penalty)
    feasible = enumerate_feasible("mvc", graph)
    optimal_objective = min(feasible.values())
    optimal = [
        cost.decode(z)
        for z, obj in sorted(feasible.items())
        if obj <= optimal_objective + 1e-9
    ]
    return _run_and_report(
        args, "mvc", graph, circuit, cost, len, optimal_objective, optimal
    )


def cmd_support(args: argparse.Namespace) -> int:
    if args.problem == "tsp":
        if args.graph:
            graph = load_graph(args.graph)
        else:
            graph = complete_graph(args.cities, seed=args.seed)
        n = graph.n_vertices
        if args.ansatz == "proposed1":
            circuit = build_tsp_proposed1(n)
        elif args.ansatz == "proposed4":
            circuit = build_tsp_proposed4(n)
        else:
            circuit = build_ry_baseline(n * n, args.depth)
        feasible = frozenset(enumerate_feasible("tsp", graph))
    else:
        graph = _mvc_graph(args.graph or "builtin6")
        if args.ansatz in ("proposed", "proposed1", "proposed4"):
            circuit = build_mvc_ansatz(graph, spanning_tree(graph))
        else:
            circuit = build_ry_baseline(graph.n_vertices, args.depth)
        feasible = frozenset(enumerate_feasible("mvc", graph))

    report = support(
        circuit, draws=args.draws, seed=args.seed, epsilon=args.epsilon
    )
    includes_feasible = feasible <= report.basis_set
    equals_feasible = feasible == report.basis_set
    print(
        f"|S_proposed| = {len(report.basis_set)}, |S_all| = {report.n_all}, "
        f"|S_feasible| = {len(feasible)}"
    )
    print(f"S_feasible subset of S_proposed: {includes_feasible}")
    print(f"S_proposed subset of S_all: True")
    print(f"S_proposed equals S_feasible: {equals_feasible}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": "support",
        "config": _config_echo(args),
        "graph": _graph_json(graph),
        "sizes": {
            "proposed": len(report.basis_set),
            "all": report.n_all,
            "feasible": len(feasible),
        },
        "verdicts": {
            "feasible_subset_of_proposed": includes_feasible,
            "proposed_subset_of_all": True,
            "proposed_equals_feasible": equals_feasible,
        },
        "max_excluded_probability": report.max_excluded_prob,
        "basis_set": sorted(report.basis_set) if len(report.basis_set) <= 4096 else None,
    }
    path = out / "support.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
    return 0


def cmd_gatecount(args: argparse.Namespace) -> int:
    checks = verify_counts(
        cities=range(2, args.max_cities + 1),
        depths=range(0, args.max_depth + 1),
        cover_sizes=range(2, args.max_cover + 1),
    )
    lines = ["builder,n_qubits,field,built,expected,status"]
    failures = 0
    for c in checks:
        if c.asserted:
            status = "pass" if c.ok else "FAIL"
            failures += not c.ok
        else:
            status = "info" + ("" if c.ok else " (differs)")
        lines.append(f"{c.builder},{c.n_qubits},{c.field},{c.built},{c.expected},{status}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "gatecount.csv"
    path.write_text("\n".join(lines) + "\n")

    width = max(len(c.builder) for c in checks)
    for c in checks:
        if c.asserted:
            status = "pass" if c.ok else "FAIL"
        else:
            status = "info"
        print(
            f"{c.builder:<{width}} n={c.n_qubits:<3} {c.field:<10} "
            f"built={c.built:<5} expected={c.expected:<5} {status}"
        )
    print(f"wrote {path}")
    return 1 if failures else 0


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--optimizer", choices=("nelder-mead", "spsa"), default="nelder-mead")
    p.add_argument("--mode", default="exact", help="'exact' or 'shots:K'")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-evals", type=int, default=500, dest="max_evals")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--threads", type=int, default=1)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (graph + trials)")
    p.add_argument("--out", default=".", help="artifact directory (created)")
    p.add_argument("--config", default=None, help="JSON file with defaults")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="pqcbench",
        description="constraint-restricted variational circuits for tours and covers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = sub.add_parser("tsp", help="run variational tour trials")
    p.add_argument("--cities", type=int, default=4)
    p.add_argument("--graph", default=None, help="graph file (overrides --cities)")
    p.add_argument("--ansatz", choices=("proposed1", "proposed4", "ry"), default="proposed1")
    p.add_argument("--depth", type=int, default=1, help="ry baseline depth")
    p.add_argument("--penalty", type=float, default=None)
    _add_run_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_tsp)
    subparsers["tsp"] = p

    p = sub.add_parser("mvc", help="run variational cover trials")
    p.add_argument("--graph", default="builtin6", help="'builtin6' or a graph file")
    p.add_argument("--ansatz", choices=("proposed", "ry"), default="proposed")
    p.add_argument("--depth", type=int, default=1, help="ry baseline depth")
    p.add_argument("--penalty", type=float, default=2.0)
    _add_run_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_mvc)
    subparsers["mvc"] = p

    p = sub.add_parser("support", help="measure the reachable basis set of an ansatz")
    p.add_argument("--problem", choices=("tsp", "mvc"), required=True)
    p.add_argument("--cities", type=int, default=4)
    p.add_argument("--graph", default=None)
    p.add_argument(
        "--ansatz",
        choices=("proposed", "proposed1", "proposed4", "ry"),
        default="proposed1",
    )
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=1e-9)
    _add_common(p)
    p.set_defaults(func=cmd_support)
    subparsers["support"] = p

    p = sub.add_parser("gatecount", help="builder gate counts vs closed forms")
    p.add_argument("--max-cities", type=int, default=8, dest="max_cities")
    p.add_argument("--max-depth", type=int, default=3, dest="max_depth")
    p.add_argument("--max-cover", type=int, default=8, dest="max_cover")
    _add_common(p)
    p.set_defaults(func=cmd_gatecount)
    subparsers["gatecount"] = p

    return parser, subparsers


def _apply_config_file(
    args: argparse.Namespace, argv: list[str], subparser: argparse.ArgumentParser
) -> None:
    """Overlay values from --config that were not given explicitly on the CLI."""
    cfg = json.loads(Path(args.config).read_text())
    if "config" in cfg and isinstance(cfg["config"], dict):
        cfg = cfg["config"]
    explicit = set()
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt in argv or any(a.startswith(opt + "=") for a in argv):
                explicit.add(action.dest)
    for key, value in cfg.items():
        if key in ("func", "config", "command"):
            continue
        if key not in vars(args):
            raise ValueError(f"unknown config key {key!r}")
        if key not in explicit:
            setattr(args, key, value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config_file(args, argv, subparsers[args.command])
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
