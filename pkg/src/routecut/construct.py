"""Greedy nearest-task route construction."""

from __future__ import annotations

import random

from .distances import DistanceTable
from .instance import Instance
from .solution import Solution


def path_scanning(instance: Instance, dist: DistanceTable, rng: random.Random) -> Solution:
    """Build a feasible solution by repeatedly serving the nearest unserved
    task that fits the remaining capacity, opening a new route when nothing
    fits.  Distance ties are broken uniformly at random.
    """
    rows = dist.rows
    head = instance.id_head
    tail = instance.id_tail
    unserved = set(range(instance.task_count))
    interiors: list[list[int]] = []

    while unserved:
        current = instance.depot
        load = 0.0
        interior: list[int] = []
        while True:
            row = rows[current]
            best_d = None
            best_ids: list[int] = []
            for ti in unserved:
                task = instance.tasks[ti]
                if load + task.demand > instance.capacity:
                    continue
                for tid in (task.forward_id, task.reverse_id):
                    d = row[head[tid]]
                    if best_d is None or d < best_d:
                        best_d = d
                        best_ids = [tid]
                    elif d == best_d:
                        best_ids.append(tid)
            if best_d is None:
                break
            tid = best_ids[0] if len(best_ids) == 1 else best_ids[rng.randrange(len(best_ids))]
            interior.append(tid)
            load += instance.id_demand[tid]
            current = tail[tid]
            unserved.remove((tid - 1) >> 1)
        interiors.append(interior)
    return Solution.build(interiors, instance, dist)
