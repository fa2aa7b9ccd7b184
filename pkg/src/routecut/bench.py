"""Seeded multi-run benchmark experiments.

An experiment is a grid of (instance, variant, run) cells.  Each cell
solves one instance with one algorithm variant under a time budget, using
seed ``base_seed + run``, and persists the solution and its convergence
trace.  Cells are independent and may execute in a bounded process pool;
failures are recorded per cell and never abort the experiment.
"""

from __future__ import annotations

import csv
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .decompose import ClusterConfig
from .instance import Instance, load_instance
from .rco import RcoParams
from .search import ALGORITHMS, SearchConfig, solve
from .solution import read_solution, validate, write_solution


@dataclass
class ExperimentSpec:
    instances: list[Path]
    variants: list[tuple[str, SearchConfig]]
    runs: int = 25
    base_seed: int = 0
    budget: str | None = None  # "fixed:<sec>" or "per-knodes:<sec>"
    time_multiplier: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")


@dataclass
class RunRecord:
    instance: str
    variant: str
    seed: int
    final_cost: float
    elapsed_sec: float
    route_count: int
    trace_path: str
    solution_path: str
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


def resolve_budget(spec: ExperimentSpec, config: SearchConfig, instance: Instance) -> float:
    """Per-run time limit in seconds after budget mode and machine scaling."""
    if spec.budget is None:
        base = config.time_limit
    else:
        mode, _, value = spec.budget.partition(":")
        if not value:
            raise ValueError(f"budget {spec.budget!r} lacks a seconds value")
        seconds = float(value)
        if mode == "fixed":
            base = seconds
        elif mode == "per-knodes":
            base = seconds * instance.vertex_count / 1000.0
        else:
            raise ValueError(f"unknown budget mode {mode!r}")
    return base * spec.time_multiplier


_instance_cache: dict[str, Instance] = {}


def _cached_instance(path: str) -> Instance:
    inst = _instance_cache.get(path)
    if inst is None:
        inst = load_instance(path)
        _instance_cache[path] = inst
    return inst


def _run_cell(args: tuple) -> RunRecord:
    instance_path, variant, config, seed, time_limit, out_dir = args
    out_dir = Path(out_dir)
    stem = Path(instance_path).stem
    sol_path = out_dir / f"{stem}__{variant}__s{seed}.sol"
    trace_path = out_dir / f"{stem}__{variant}__s{seed}.trace.csv"
    try:
        instance = _cached_instance(instance_path)
        config = replace(config, seed=seed, time_limit=time_limit)
        best, trace = solve(instance, config)

        problems = validate(best, instance)
        if problems:
            raise RuntimeError(f"infeasible result: {problems[0].detail}")
        with open(sol_path, "w") as fh:
            write_solution(best, instance, fh)
        with open(trace_path, "w") as fh:
            trace.write_csv(fh)
        with open(sol_path) as fh:
            reread, _ = read_solution(fh, instance, instance.distances())
        if abs(reread.total_cost - best.total_cost) > 1e-6:
            raise RuntimeError(
                f"stored solution re-costs to {reread.total_cost}, expected {best.total_cost}"
            )
        elapsed = trace.samples[-1][0] / 1000.0 if trace.samples else 0.0
        return RunRecord(
            stem, variant, seed, best.total_cost, elapsed,
            best.route_count, str(trace_path), str(sol_path),
        )
    except Exception:
        return RunRecord(
            stem, variant, seed, math.nan, 0.0, 0, str(trace_path), str(sol_path),
            error=traceback.format_exc(limit=2).strip().splitlines()[-1],
        )


def run_experiment(spec: ExperimentSpec, out_dir: str | Path) -> list[RunRecord]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = []
    broken: list[RunRecord] = []
    for instance_path in spec.instances:
        try:
            instance = _cached_instance(str(instance_path))
        except Exception as exc:
            broken.extend(
                RunRecord(
                    Path(instance_path).stem, variant, spec.base_seed + run,
                    math.nan, 0.0, 0, "", "", error=f"{type(exc).__name__}: {exc}",
                )
                for variant, _ in spec.variants
                for run in range(spec.runs)
            )
            continue
        for variant, config in spec.variants:
            limit = resolve_budget(spec, config, instance)
            for run in range(spec.runs):
                cells.append(
                    (str(instance_path), variant, config, spec.base_seed + run, limit, str(out_dir))
                )

    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            records = list(ex.map(_run_cell, cells))
    else:
        records = [_run_cell(c) for c in cells]
    records.extend(broken)

    write_records_csv(records, out_dir / "records.csv")
    rows = summarize(records)
    write_summary_csv(rows, out_dir / "summary.csv")
    return records


_RECORD_FIELDS = [
    "instance", "variant", "seed", "final_cost", "elapsed_sec",
    "route_count", "trace_path", "solution_path", "error",
]


def write_records_csv(records: list[RunRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RECORD_FIELDS)
        for r in records:
            writer.writerow(
                [r.instance, r.variant, r.seed, repr(r.final_cost), repr(r.elapsed_sec),
                 r.route_count, r.trace_path, r.solution_path, r.error]
            )


def read_records_csv(path: str | Path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                RunRecord(
                    row["instance"], row["variant"], int(row["seed"]),
                    float(row["final_cost"]), float(row["elapsed_sec"]),
                    int(row["route_count"]), row["trace_path"], row["solution_path"],
                    row.get("error", ""),
                )
            )
    return records


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    variant: str
    runs: int
    mean: float
    std: float
    flag: str = ""


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Mean and sample standard deviation of final cost per cell."""
    cells: dict[tuple[str, str], list[float]] = {}
    failures: dict[tuple[str, str], int] = {}
    for r in records:
        key = (r.instance, r.variant)
        if r.failed:
            failures[key] = failures.get(key, 0) + 1
            cells.setdefault(key, [])
        else:
            cells.setdefault(key, []).append(r.final_cost)

    rows = []
    for (instance, variant) in sorted(cells):
        costs = cells[(instance, variant)]
        flags = []
        if failures.get((instance, variant)):
            flags.append(f"{failures[(instance, variant)]}-failed")
        if not costs:
            rows.append(SummaryRow(instance, variant, 0, math.nan, math.nan, ";".join(flags)))
            continue
        mean = sum(costs) / len(costs)
        if len(costs) == 1:
            flags.append("single-run")
            std = 0.0
        else:
            std = math.sqrt(sum((c - mean) ** 2 for c in costs) / (len(costs) - 1))
        rows.append(SummaryRow(instance, variant, len(costs), mean, std, ";".join(flags)))
    return rows


def write_summary_csv(rows: list[SummaryRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "variant", "runs", "mean", "std", "flag"])
        for r in rows:
            writer.writerow([r.instance, r.variant, r.runs, repr(r.mean), repr(r.std), r.flag])


def samples_by_cell(records: list[RunRecord]) -> dict[tuple[str, str], list[float]]:
    out: dict[tuple[str, str], list[float]] = {}
    for r in records:
        if not r.failed:
            out.setdefault((r.instance, r.variant), []).append(r.final_cost)
    return out


# --- experiment config files -------------------------------------------------
#
# Plain `key = value` lines; `#` starts a comment.  Keys mirror the
# ExperimentSpec and SearchConfig fields:
#
#   instances = a.dat, b.dat
#   variants = sahid-rco, sahid-random
#   runs = 11
#   base_seed = 1000
#   budget = fixed:60
#   time_multiplier = 1.0
#   lambda = 0.05
#   theta = 0.2
#   groups = 2
#   alpha = 5
#   scale = 0.1
#   accept = 1.10
#   idle = 10000
#   max_cycles = 50
#   max_iterations = 0        # 0 = no cap
#   virtual_clock = false
#   workers = 1

def parse_experiment_config(path: str | Path) -> ExperimentSpec:
    values: dict[str, str] = {}
    base = Path(path).parent
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected `key = value`")
        key, _, value = line.partition("=")
        values[key.strip().lower()] = value.strip()

    def _list(key: str) -> list[str]:
        return [item.strip() for item in values.get(key, "").split(",") if item.strip()]

    instances = [Path(p) if Path(p).is_absolute() else base / p for p in _list("instances")]
    if not instances:
        raise ValueError("config declares no instances")
    variant_names = _list("variants")
    if not variant_names:
        raise ValueError("config declares no variants")
    for name in variant_names:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown variant {name!r}; choose from {ALGORITHMS}")

    rco = RcoParams(float(values.get("lambda", 0.05)), float(values.get("theta", 0.2)))
    cluster = ClusterConfig(int(values.get("groups", 2)), float(values.get("alpha", 5.0)))
    max_iterations = int(values.get("max_iterations", 0)) or None
    config = SearchConfig(
        algorithm=variant_names[0],
        rco=rco,
        cluster=cluster,
        scale=float(values.get("scale", 0.1)),
        accept_threshold=float(values.get("accept", 1.10)),
        idle_limit=int(values.get("idle", 10000)),
        max_cycles=int(values.get("max_cycles", 50)),
        time_limit=float(values.get("time_limit", 30.0)),
        sub_solver_budget=int(values.get("sub_solver_budget", 50_000)),
        max_iterations=max_iterations,
        virtual_clock=values.get("virtual_clock", "false").lower() in ("1", "true", "yes"),
    )
    variants = [(name, replace(config, algorithm=name)) for name in variant_names]
    return ExperimentSpec(
        instances=instances,
        variants=variants,
        runs=int(values.get("runs", 25)),
        base_seed=int(values.get("base_seed", 0)),
        budget=values.get("budget"),
        time_multiplier=float(values.get("time_multiplier", 1.0)),
        workers=int(values.get("workers", 1)),
    )
