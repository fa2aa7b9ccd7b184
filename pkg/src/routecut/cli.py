"""Command-line interface: solve, bench, stats, gen, validate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    parse_experiment_config,
    read_records_csv,
    run_experiment,
    samples_by_cell,
    summarize,
)
from .decompose import ClusterConfig
from .generator import generate_instance_file
from .instance import load_instance
from .rco import RcoParams
from .search import ALGORITHMS, SearchConfig, solve
from .solution import min_vehicles, read_solution, validate, write_solution
from .stats import significance_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routecut",
        description="Capacitated arc routing solver and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("instance", type=Path)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="sahid-rco")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=30.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--groups", type=int, default=2)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--scale", type=float, default=0.1)
    p.add_argument("--accept", type=float, default=1.10)
    p.add_argument("--idle", type=int, default=10000)
    p.add_argument("--max-cycles", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=0, help="0 = no iteration cap")
    p.add_argument("--virtual-clock", action="store_true",
                   help="deterministic trace timestamps (reproducible runs)")
    p.add_argument("--trace", type=Path, help="stream the convergence trace to this CSV")
    p.add_argument("--out", type=Path, help="write the best solution here")

    p = sub.add_parser("bench", help="run a multi-run experiment from a config file")
    p.add_argument("config", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--budget", help="fixed:<sec> or per-knodes:<sec> (overrides config)")
    p.add_argument("--time-multiplier", type=float, help="machine-speed scaling factor")
    p.add_argument("--workers", type=int, help="parallel cells (overrides config)")

    p = sub.add_parser("stats", help="summary and W-D-L tables from an experiment directory")
    p.add_argument("dir", type=Path)
    p.add_argument("--reference", required=True)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("gen", help="generate a random benchmark instance")
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--capacity", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("validate", help="check a solution file against an instance")
    p.add_argument("instance", type=Path)
    p.add_argument("solution", type=Path)
    return parser


def _cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    config = SearchConfig(
        algorithm=args.algorithm,
        rco=RcoParams(args.lam, args.theta),
        cluster=ClusterConfig(args.groups, args.alpha),
        scale=args.scale,
        accept_threshold=args.accept,
        idle_limit=args.idle,
        max_cycles=args.max_cycles,
        time_limit=args.time_limit,
        seed=args.seed,
        max_iterations=args.max_iters or None,
        virtual_clock=args.virtual_clock,
    )
    sink = open(args.trace, "w") if args.trace else None
    try:
        best, trace = solve(instance, config, trace_sink=sink)
    finally:
        if sink:
            sink.close()
    print(f"{instance.name}: cost {best.total_cost:g} with {best.route_count} routes "
          f"({trace.iterations} iterations)")
    if args.out:
        with open(args.out, "w") as fh:
            write_solution(best, instance, fh)
    return 0


def _cmd_bench(args) -> int:
    spec = parse_experiment_config(args.config)
    if args.budget:
        spec.budget = args.budget
    if args.time_multiplier is not None:
        spec.time_multiplier = args.time_multiplier
    if args.workers is not None:
        spec.workers = args.workers
    records = run_experiment(spec, args.out_dir)
    failed = [r for r in records if r.failed]
    print(f"{len(records)} runs ({len(failed)} failed) -> {args.out_dir}")
    for row in summarize(records):
        flag = f"  [{row.flag}]" if row.flag else ""
        print(f"  {row.instance:24s} {row.variant:20s} mean {row.mean:14.1f} "
              f"std {row.std:10.1f}{flag}")
    return 1 if failed else 0


def _fmt_aligned(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows)


def _cmd_stats(args) -> int:
    records = read_records_csv(args.dir / "records.csv")
    rows = summarize(records)
    table = significance_table(samples_by_cell(records), args.reference, args.alpha)

    summary_rows = [["instance", "variant", "runs", "mean", "std", "flag"]]
    for r in rows:
        summary_rows.append(
            [r.instance, r.variant, str(r.runs), f"{r.mean:.1f}", f"{r.std:.1f}", r.flag]
        )
    print(_fmt_aligned(summary_rows))
    print()
    wdl_rows = [["variant", "W", "D", "L"]]
    for variant, (w, d, l) in sorted(table.wdl.items()):
        wdl_rows.append([variant, str(w), str(d), str(l)])
    print(f"reference: {table.reference} (alpha={table.alpha})")
    print(_fmt_aligned(wdl_rows))

    from .bench import write_summary_csv

    write_summary_csv(rows, args.dir / "summary.csv")
    with open(args.dir / "wdl.csv", "w") as fh:
        fh.write("variant,wins,draws,losses\n")
        for variant, (w, d, l) in sorted(table.wdl.items()):
            fh.write(f"{variant},{w},{d},{l}\n")
    with open(args.dir / "comparisons.csv", "w") as fh:
        fh.write("instance,variant,pvalue,outcome\n")
        for c in table.detail:
            fh.write(f"{c.instance},{c.variant},{c.pvalue!r},{c.outcome}\n")
    return 0


def _cmd_gen(args) -> int:
    instance = generate_instance_file(
        args.out, args.vertices, args.tasks, args.capacity, args.seed
    )
    print(f"wrote {args.out}: |V|={instance.vertex_count} |T|={instance.task_count} "
          f"Q={instance.capacity} min-vehicles={min_vehicles(instance)}")
    return 0


def _cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    with open(args.solution) as fh:
        solution, stated = read_solution(fh, instance)
    problems = validate(solution, instance)
    if problems:
        for v in problems:
            where = f" (route {v.route})" if v.route is not None else ""
            print(f"violation: {v.kind}: {v.detail}{where}")
        return 1
    drift = abs(solution.total_cost - stated)
    note = "" if drift <= 1e-6 else f" (file states {stated:g})"
    print(f"feasible: cost {solution.total_cost:g}, {solution.route_count} routes{note}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "stats": _cmd_stats,
        "gen": _cmd_gen,
        "validate": _cmd_validate,
    }[args.command]
    try:
        return handler(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
