"""Top-level search loops.

Two divide-and-conquer shapes share the splitting/clustering machinery:

* the hierarchical loop (``sahid-rco`` / ``sahid-random``): split the
  current solution into sub-routes, wrap them as virtual tasks, rebuild a
  solution hierarchically, improve it with local search, and accept it if
  better (or slightly worse once the search has idled long enough);
* the clustering loop (``cluster-rco`` / ``cluster-whole-route``): each
  cycle splits the best-so-far solution, groups the pieces into task
  subsets by fuzzy k-medoids, solves the induced sub-problems
  independently (optionally in parallel), and recombines the per-group
  winners.

``local-only`` (construction plus one local-search descent) serves as the
no-decomposition baseline.

Wall-clock budgets cannot reproduce byte-identically; for reproducible
runs, bound the work with ``max_iterations`` / ``max_cycles`` /
``sub_solver_budget`` and enable ``virtual_clock``, which stamps traces
with a deterministic counter instead of real time.
"""

from __future__ import annotations

import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO

from .construct import path_scanning
from .decompose import (
    ClusterConfig,
    build_virtual_tasks,
    elementary_virtual_tasks,
    fuzzy_kmedoid,
    group_task_indices,
    hdu,
)
from .distances import DistanceTable
from .instance import Instance, task_index_of
from .localsearch import local_search, neighbor_lists
from .ranking import RankMatrix, build_rank_matrix
from .rco import RcoParams, rco_split, uniform_split
from .seeding import make_rng
from .solution import Route, Solution

ALGORITHMS = (
    "sahid-rco",
    "sahid-random",
    "cluster-rco",
    "cluster-whole-route",
    "local-only",
)


@dataclass
class SearchConfig:
    algorithm: str = "sahid-rco"
    rco: RcoParams = field(default_factory=RcoParams)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    scale: float = 0.1
    accept_threshold: float = 1.10
    idle_limit: int = 10000
    max_cycles: int = 50
    time_limit: float = 30.0
    seed: int = 0
    sub_solver_budget: int = 50_000  # local-search move evaluations per sub-problem
    max_iterations: int | None = None  # deterministic cap for the hierarchical loop
    virtual_clock: bool = False
    pool_size: int = 5  # incumbent solutions kept by the clustering loop
    neighbor_size: int = 20

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.accept_threshold < 1.0:
            raise ValueError("accept_threshold must be at least 1")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class SearchTrace:
    """Best-so-far samples plus loop bookkeeping."""

    samples: list[tuple[int, float]] = field(default_factory=list)
    iterations: int = 0
    cycles: list[dict] = field(default_factory=list)

    def record(self, elapsed_ms: int, best_cost: float, sink: IO[str] | None) -> None:
        self.samples.append((elapsed_ms, best_cost))
        if sink is not None:
            sink.write(f"{elapsed_ms},{_fmt(best_cost)}\n")
            sink.flush()

    def write_csv(self, stream: IO[str]) -> None:
        stream.write("elapsed_ms,best_cost\n")
        for ms, cost in self.samples:
            stream.write(f"{ms},{_fmt(cost)}\n")


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


class _Clock:
    """Monotonic seconds; the virtual variant advances a fixed tick per
    query so repeated runs see identical timestamps."""

    def __init__(self, virtual: bool):
        self.virtual = virtual
        self._lock = threading.Lock()
        self._ticks = 0
        self._t0 = time.monotonic()

    def now(self) -> float:
        if not self.virtual:
            return time.monotonic() - self._t0
        with self._lock:
            self._ticks += 1
            return self._ticks * 1e-3

    def elapsed_ms(self) -> int:
        return int(self.now() * 1000)


class _Deadline:
    def __init__(self, clock: _Clock, limit: float):
        self.clock = clock
        self.limit = limit

    def expired(self) -> bool:
        return self.clock.now() >= self.limit

    def __call__(self) -> bool:
        return self.expired()


def project_solution(
    solution: Solution, keep: set[int], instance: Instance, dist: DistanceTable
) -> Solution:
    """Restrict a solution to a task subset (pop2subpop).

    Out-of-subset tasks are deleted from each route and emptied routes are
    dropped; loads only decrease, so feasibility is preserved.
    """
    interiors = []
    for route in solution.routes:
        kept = [t for t in route.interior if task_index_of(t) in keep]
        if kept:
            interiors.append(kept)
    return Solution.build(interiors, instance, dist)


def concat_solutions(parts: list[Solution]) -> Solution:
    """Concatenate route sets of per-group solutions (subpop2pop)."""
    routes: list[Route] = []
    for part in parts:
        routes.extend(r.clone() for r in part.routes)
    return Solution(routes)


def solve(
    instance: Instance,
    config: SearchConfig,
    dist: DistanceTable | None = None,
    ranks: RankMatrix | None = None,
    trace_sink: IO[str] | None = None,
) -> tuple[Solution, SearchTrace]:
    """Run the configured search and return (best solution, trace)."""
    if dist is None:
        dist = instance.distances()
    if ranks is None and instance.task_count >= 2:
        ranks = build_rank_matrix(instance, dist)

    clock = _Clock(config.virtual_clock)
    deadline = _Deadline(clock, config.time_limit)
    trace = SearchTrace()
    if trace_sink is not None:
        trace_sink.write("elapsed_ms,best_cost\n")

    if config.algorithm in ("sahid-rco", "sahid-random"):
        best = _hierarchical_loop(instance, dist, ranks, config, clock, deadline, trace, trace_sink)
    elif config.algorithm in ("cluster-rco", "cluster-whole-route"):
        best = _cluster_loop(instance, dist, ranks, config, clock, deadline, trace, trace_sink)
    else:
        best = _local_only(instance, dist, ranks, config, clock, deadline, trace, trace_sink)

    best = best.stripped()
    trace.record(clock.elapsed_ms(), best.total_cost, trace_sink)
    return best, trace


def _neighbors(instance, dist, ranks, config):
    if ranks is not None:
        return ranks.nearest(config.neighbor_size)
    return neighbor_lists(instance, dist, config.neighbor_size)


def _hierarchical_loop(
    instance, dist, ranks, config, clock, deadline, trace, sink
) -> Solution:
    rng = make_rng(config.seed)
    neighbors = _neighbors(instance, dist, ranks, config)
    use_rco = config.algorithm == "sahid-rco"

    current = hdu(elementary_virtual_tasks(instance), instance, dist, config.scale, rng)
    current = local_search(
        current, instance, dist, rng,
        max_evals=config.sub_solver_budget, deadline=deadline, neighbors=neighbors,
    )
    best = current.clone()
    trace.record(clock.elapsed_ms(), best.total_cost, sink)
    if instance.task_count < 2:
        return best  # nothing to decompose

    idle = 0
    while not deadline.expired():
        if config.max_iterations is not None and trace.iterations >= config.max_iterations:
            break
        if use_rco:
            pool = rco_split(current, ranks, config.rco, rng)
        else:
            pool = uniform_split(current, rng)
        units = build_virtual_tasks(pool, instance, dist)
        candidate = hdu(units, instance, dist, config.scale, rng)
        candidate = local_search(
            candidate, instance, dist, rng,
            max_evals=config.sub_solver_budget, deadline=deadline, neighbors=neighbors,
        )
        trace.iterations += 1

        improved_best = candidate.total_cost < best.total_cost
        accepted_worse = False
        if improved_best:
            best = candidate.clone()
            trace.record(clock.elapsed_ms(), best.total_cost, sink)
        if candidate.total_cost < current.total_cost:
            current = candidate
        elif (
            candidate.total_cost <= config.accept_threshold * current.total_cost
            and idle > config.idle_limit
        ):
            current = candidate
            accepted_worse = True
        idle = 0 if (improved_best or accepted_worse) else idle + 1

    if trace.iterations == 0:
        warnings.warn("time limit exhausted before the first improvement iteration")
    return best


def _local_only(instance, dist, ranks, config, clock, deadline, trace, sink) -> Solution:
    rng = make_rng(config.seed)
    neighbors = _neighbors(instance, dist, ranks, config)
    best = path_scanning(instance, dist, rng)
    trace.record(clock.elapsed_ms(), best.total_cost, sink)
    best = local_search(
        best, instance, dist, rng, deadline=deadline, neighbors=neighbors,
    )
    trace.iterations = 1
    trace.record(clock.elapsed_ms(), best.total_cost, sink)
    return best


def _cluster_loop(instance, dist, ranks, config, clock, deadline, trace, sink) -> Solution:
    neighbors = _neighbors(instance, dist, ranks, config)
    whole_routes = config.algorithm == "cluster-whole-route"
    split_params = RcoParams(0.0, 0.0) if whole_routes else config.rco

    pool: list[Solution] = []
    for i in range(config.pool_size):
        rng_i = make_rng(config.seed, 0, i)
        s = path_scanning(instance, dist, rng_i)
        s = local_search(
            s, instance, dist, rng_i,
            max_evals=config.sub_solver_budget, deadline=deadline, neighbors=neighbors,
        )
        pool.append(s)
    best = min(pool, key=lambda s: s.total_cost).clone()
    trace.record(clock.elapsed_ms(), best.total_cost, sink)
    if instance.task_count < 2:
        return best  # nothing to decompose

    rng = make_rng(config.seed, 1)
    cycles_done = 0
    for cycle in range(config.max_cycles):
        if deadline.expired():
            break
        subroutes = rco_split(best, ranks, split_params, rng)
        groups = fuzzy_kmedoid(subroutes, config.cluster, ranks, rng)
        task_sets = [group_task_indices(g) for g in groups]

        def solve_group(gi: int) -> list[Solution]:
            keep = task_sets[gi]
            grng = make_rng(config.seed, 2, cycle, gi)
            out = []
            for member in pool:
                sub = project_solution(member, keep, instance, dist)
                out.append(
                    local_search(
                        sub, instance, dist, grng,
                        max_evals=config.sub_solver_budget,
                        deadline=deadline, neighbors=neighbors,
                    )
                )
            return out

        if len(groups) > 1:
            with ThreadPoolExecutor(max_workers=len(groups)) as ex:
                per_group = list(ex.map(solve_group, range(len(groups))))
        else:
            per_group = [solve_group(0)]

        new_pool = [
            concat_solutions([per_group[g][m] for g in range(len(groups))])
            for m in range(len(pool))
        ]
        champions = concat_solutions(
            [min(per_group[g], key=lambda s: s.total_cost) for g in range(len(groups))]
        )
        # the recombined winner mixes routes that never saw each other, so a
        # whole-problem polish often repairs the group boundaries
        champions = local_search(
            champions, instance, dist, make_rng(config.seed, 3, cycle),
            max_evals=config.sub_solver_budget, deadline=deadline, neighbors=neighbors,
        )
        worst = max(range(len(new_pool)), key=lambda m: new_pool[m].total_cost)
        if champions.total_cost < new_pool[worst].total_cost:
            new_pool[worst] = champions
        pool = new_pool

        cycle_best = min(pool, key=lambda s: s.total_cost)
        trace.cycles.append(
            {
                "cycle": cycle,
                "subroutes": len(subroutes),
                "group_sizes": [len(g) for g in groups],
                "best_cost": cycle_best.total_cost,
            }
        )
        cycles_done += 1
        trace.iterations += 1
        if cycle_best.total_cost < best.total_cost:
            best = cycle_best.clone()
            trace.record(clock.elapsed_ms(), best.total_cost, sink)

    if cycles_done == 0:
        warnings.warn("time limit exhausted before the first cycle")
    return best
