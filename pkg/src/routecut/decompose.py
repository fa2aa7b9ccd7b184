"""Turning sub-route pools into sub-problems.

Two decomposition paths are supported.  The clustering path groups
sub-routes around medoid sub-routes with a fuzziness-controlled
probabilistic assignment, yielding task subsets that induce independent
sub-problems.  The hierarchical path wraps sub-routes into virtual tasks
(atomic ordered sequences with aggregate demand, internal cost, and two
endpoints) and repeatedly clusters and chains them into ever coarser
units until a single giant sequence remains, which is then split into
capacity-feasible routes.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass

import numpy as np

from .distances import DistanceTable
from .instance import Instance, inverse_id, task_index_of
from .ranking import RankMatrix
from .rco import SubRoute, SubRoutePool
from .solution import Solution


@dataclass(frozen=True)
class ClusterConfig:
    """Group count and fuzziness exponent for sub-route clustering."""

    group_count: int = 2
    fuzziness: float = 5.0

    def __post_init__(self):
        if self.group_count < 1:
            raise ValueError("group_count must be at least 1")
        if self.fuzziness <= 0:
            raise ValueError("fuzziness must be positive")


def subroute_distance(a: SubRoute, b: SubRoute, ranks: RankMatrix) -> float:
    """Mean link cost over all task pairs of two sub-routes (0 for identity)."""
    if a is b:
        return 0.0
    ai = a.task_indices()
    bi = b.task_indices()
    block = ranks.numerators[np.ix_(ai, bi)]
    return float(block.mean()) / 4.0


def _pairwise_distances(pool: list[SubRoute], ranks: RankMatrix) -> np.ndarray:
    n = len(pool)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = subroute_distance(pool[i], pool[j], ranks)
    return d


def _farthest_point_medoids(d: np.ndarray, g: int, rng: random.Random) -> list[int]:
    n = d.shape[0]
    medoids = [rng.randrange(n)]
    while len(medoids) < g:
        nearest = d[:, medoids].min(axis=1)
        nearest[medoids] = -1.0
        medoids.append(int(np.argmax(nearest)))
    return medoids


def fuzzy_kmedoid(
    pool: SubRoutePool,
    config: ClusterConfig,
    ranks: RankMatrix,
    rng: random.Random,
) -> list[list[SubRoute]]:
    """Partition sub-routes into ``group_count`` non-empty groups.

    Medoids start by farthest-point selection from a random sub-route.
    Each iteration assigns every sub-route to a medoid with probability
    proportional to distance**(-fuzziness) (zero distance forces the
    assignment), then recenters each medoid on the member minimizing total
    within-group distance, stopping when assignments stabilize or after 20
    iterations.  Sub-routes are atomic: they are never split across groups.
    """
    members = list(pool)
    n = len(members)
    if n == 0:
        raise ValueError("cannot cluster an empty pool")
    g = config.group_count
    if g > n:
        warnings.warn(f"pool of {n} sub-routes cannot fill {g} groups; reducing to {n}")
        g = n

    d = _pairwise_distances(members, ranks)
    if g == 1:
        return [members]

    alpha = config.fuzziness
    medoids = _farthest_point_medoids(d, g, rng)
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(20):
        new_assign = np.empty(n, dtype=np.int64)
        for i in range(n):
            dists = d[i, medoids]
            nearest = int(np.argmin(dists))
            if dists[nearest] == 0.0:
                new_assign[i] = nearest
                continue
            weights = (dists / dists[nearest]) ** (-alpha)
            cum = np.cumsum(weights)
            x = rng.random() * cum[-1]
            new_assign[i] = int(np.searchsorted(cum, x, side="right"))
        _repair_empty_groups(new_assign, d, medoids)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for group in range(g):
            idx = np.flatnonzero(assign == group)
            within = d[np.ix_(idx, idx)].sum(axis=1)
            medoids[group] = int(idx[np.argmin(within)])

    groups: list[list[SubRoute]] = [[] for _ in range(g)]
    for i in range(n):
        groups[int(assign[i])].append(members[i])
    return groups


def _repair_empty_groups(assign: np.ndarray, d: np.ndarray, medoids: list[int]) -> None:
    # Move the sub-route farthest from its own medoid into each empty group,
    # drawing only from groups that keep at least one member.
    g = len(medoids)
    for group in range(g):
        if np.any(assign == group):
            continue
        counts = np.bincount(assign, minlength=g)
        candidates = np.flatnonzero(counts[assign] >= 2)
        far = candidates[np.argmax([d[i, medoids[assign[i]]] for i in candidates])]
        assign[far] = group


def group_task_indices(group: list[SubRoute]) -> set[int]:
    out: set[int] = set()
    for s in group:
        out.update(s.task_indices())
    return out


# --- virtual tasks and hierarchical construction -----------------------------


@dataclass(frozen=True)
class VirtualTask:
    """An ordered task sequence treated as one atomic unit.

    ``internal_cost`` is the objective contribution of traversing the
    sequence itself: member service costs plus the shortest-path
    connections between consecutive members, without depot legs.
    """

    ids: tuple[int, ...]
    demand: float
    internal_cost: float
    head: int
    tail: int
    reversible: bool = True

    def reversed(self) -> "VirtualTask":
        """Same unit traversed the other way (cost unchanged on undirected graphs)."""
        return VirtualTask(
            tuple(inverse_id(t) for t in reversed(self.ids)),
            self.demand,
            self.internal_cost,
            self.tail,
            self.head,
            self.reversible,
        )

    def __len__(self) -> int:
        return len(self.ids)


def virtual_task_from_ids(
    ids: tuple[int, ...], instance: Instance, dist: DistanceTable
) -> VirtualTask:
    rows = dist.rows
    demand = 0.0
    cost = 0.0
    for t in ids:
        demand += instance.id_demand[t]
        cost += instance.id_service[t]
    for a, b in zip(ids, ids[1:]):
        cost += rows[instance.id_tail[a]][instance.id_head[b]]
    return VirtualTask(ids, demand, cost, instance.id_head[ids[0]], instance.id_tail[ids[-1]])


def build_virtual_tasks(
    pool: SubRoutePool, instance: Instance, dist: DistanceTable
) -> list[VirtualTask]:
    """One virtual task per sub-route, order and orientation preserved."""
    if len(pool) == 0:
        raise ValueError("cannot build virtual tasks from an empty pool")
    return [virtual_task_from_ids(s.ids, instance, dist) for s in pool]


def elementary_virtual_tasks(instance: Instance) -> list[VirtualTask]:
    """One single-task unit per task, forward orientation."""
    dist = instance.distances()
    return [
        virtual_task_from_ids((t.forward_id,), instance, dist) for t in instance.tasks
    ]


def _endpoint_distance(a: VirtualTask, b: VirtualTask, rows: list[list[float]]) -> float:
    # Units are traversable in either direction, so take the best pairing.
    ra = rows[a.head]
    rb = rows[a.tail]
    return min(ra[b.head], ra[b.tail], rb[b.head], rb[b.tail])


def _pick_min(values: list[float], rng: random.Random) -> int:
    best = min(values)
    ties = [i for i, v in enumerate(values) if v == best]
    return ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]


def _chain_cluster(
    units: list[VirtualTask], rows: list[list[float]], rng: random.Random
) -> tuple[int, ...]:
    """Order one cluster by a randomized nearest-neighbor chain, orienting
    each appended unit so its nearer endpoint joins the chain tail."""
    remaining = list(units)
    cur = remaining.pop(rng.randrange(len(remaining)))
    ids = list(cur.ids)
    tail = cur.tail
    while remaining:
        row = rows[tail]
        dists = [
            min(row[u.head], row[u.tail]) if u.reversible else row[u.head]
            for u in remaining
        ]
        j = _pick_min(dists, rng)
        nxt = remaining.pop(j)
        if nxt.reversible and row[nxt.tail] < row[nxt.head]:
            nxt = nxt.reversed()
        ids.extend(nxt.ids)
        tail = nxt.tail
    return tuple(ids)


def hdu(
    units: list[VirtualTask],
    instance: Instance,
    dist: DistanceTable,
    scale: float,
    rng: random.Random,
) -> Solution:
    """Hierarchically concatenate units into a single giant sequence, then
    split it greedily into capacity-feasible routes.

    While more than one unit remains, the units are clustered to
    ceil(scale * m) medoids chosen farthest-point style on endpoint
    distances, each cluster is chained nearest-neighbor into one
    higher-level unit, and the process repeats.  ``units`` must cover every
    instance task exactly once.
    """
    if not 0.0 < scale < 1.0:
        raise ValueError("scale must be in (0, 1)")
    covered = sorted(ti for u in units for ti in map(task_index_of, u.ids))
    if covered != list(range(instance.task_count)):
        raise ValueError("units must cover all tasks exactly once")

    rows = dist.rows
    while len(units) > 1:
        m = len(units)
        k = max(1, min(math.ceil(scale * m), m - 1))
        medoids = [rng.randrange(m)]
        nearest = [_endpoint_distance(u, units[medoids[0]], rows) for u in units]
        while len(medoids) < k:
            nearest_masked = [
                -1.0 if i in medoids else nearest[i] for i in range(m)
            ]
            far = int(np.argmax(nearest_masked))
            medoids.append(far)
            for i in range(m):
                d = _endpoint_distance(units[i], units[far], rows)
                if d < nearest[i]:
                    nearest[i] = d

        clusters: list[list[VirtualTask]] = [[] for _ in range(k)]
        for u in units:
            dists = [_endpoint_distance(u, units[mi], rows) for mi in medoids]
            clusters[_pick_min(dists, rng)].append(u)

        units = [
            virtual_task_from_ids(_chain_cluster(cluster, rows, rng), instance, dist)
            for cluster in clusters
            if cluster
        ]

    giant = units[0].ids
    demand = instance.id_demand
    capacity = instance.capacity
    interiors: list[list[int]] = []
    current: list[int] = []
    load = 0.0
    for t in giant:
        if current and load + demand[t] > capacity:
            interiors.append(current)
            current = []
            load = 0.0
        current.append(t)
        load += demand[t]
    if current:
        interiors.append(current)
    return Solution.build(interiors, instance, dist)
