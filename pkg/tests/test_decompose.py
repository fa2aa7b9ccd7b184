"""Sub-route clustering, virtual tasks, and hierarchical construction."""

import random
from collections import Counter
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routecut import (
    ClusterConfig,
    RankMatrix,
    RcoParams,
    build_rank_matrix,
    build_virtual_tasks,
    elementary_virtual_tasks,
    fuzzy_kmedoid,
    hdu,
    rco_split,
    subroute_distance,
    validate,
)
from routecut.decompose import group_task_indices, virtual_task_from_ids
from routecut.generator import generate_instance
from routecut.instance import forward_id
from routecut.rco import SubRoute, SubRoutePool
from routecut.seeding import make_rng

from conftest import make_instance


def _pool_of_singletons(task_indices):
    return SubRoutePool([
        SubRoute((forward_id(ti),), i, 0) for i, ti in enumerate(task_indices)
    ])


def _numerator_matrix(values):
    costs = np.array(values, dtype=np.int64) * 4
    from routecut.ranking import rank_rows

    return RankMatrix(costs, rank_rows(costs))


def test_subroute_distance_identity_is_zero():
    ranks = _numerator_matrix([[0, 3], [3, 0]])
    (a, b) = _pool_of_singletons([0, 1])
    assert subroute_distance(a, a, ranks) == 0.0


def test_subroute_distance_single_pair():
    ranks = _numerator_matrix([[0, 3], [3, 0]])
    a, b = _pool_of_singletons([0, 1])
    assert subroute_distance(a, b, ranks) == pytest.approx(3.0)


def test_subroute_distance_hand_mean():
    ranks = _numerator_matrix([[0, 2, 5], [2, 0, 9], [5, 9, 0]])
    a = SubRoute((forward_id(0),), 0, 0)
    b = SubRoute((forward_id(1), forward_id(2)), 1, 0)
    # mean of delta(0,1)=2 and delta(0,2)=5
    assert subroute_distance(a, b, ranks) == pytest.approx(3.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_subroute_distance_symmetry(seed):
    rng = random.Random(seed)
    inst = generate_instance(12, 8, 16, seed=seed % 13)
    ranks = build_rank_matrix(inst, inst.distances())
    tis = list(range(8))
    rng.shuffle(tis)
    cut = rng.randint(1, 7)
    a = SubRoute(tuple(forward_id(t) for t in tis[:cut]), 0, 0)
    b = SubRoute(tuple(forward_id(t) for t in tis[cut:]), 1, 0)
    dab = subroute_distance(a, b, ranks)
    dba = subroute_distance(b, a, ranks)
    assert dab == pytest.approx(dba)
    assert dab >= 0.0


def test_single_group_contains_everything():
    ranks = _numerator_matrix([[0, 2, 5], [2, 0, 9], [5, 9, 0]])
    pool = _pool_of_singletons([0, 1, 2])
    groups = fuzzy_kmedoid(pool, ClusterConfig(1, 5.0), ranks, make_rng(0))
    assert len(groups) == 1
    assert group_task_indices(groups[0]) == {0, 1, 2}


def _two_clump_matrix():
    # tasks 0-2 mutually close (distance 1), tasks 3-5 mutually close,
    # inter-clump distance 50
    n = 6
    vals = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            vals[i][j] = 1 if (i < 3) == (j < 3) else 50
    return _numerator_matrix(vals)


def _best_two_partition(pool, ranks):
    members = list(pool)
    n = len(members)
    best, best_val = None, float("inf")
    for size in range(1, n // 2 + 1):
        for left in combinations(range(n), size):
            right = [i for i in range(n) if i not in left]
            val = 0.0
            for side in (left, right):
                for i in side:
                    for j in side:
                        if i < j:
                            val += subroute_distance(members[i], members[j], ranks)
            if val < best_val:
                best_val = val
                best = frozenset(left)
    return best


def test_two_separated_clusters_recovered_every_seed():
    ranks = _two_clump_matrix()
    pool = _pool_of_singletons(range(6))
    oracle = _best_two_partition(pool, ranks)
    assert oracle in (frozenset({0, 1, 2}), frozenset({3, 4, 5}))
    for seed in range(20):
        groups = fuzzy_kmedoid(pool, ClusterConfig(2, 50.0), ranks, make_rng(seed))
        tasks = sorted(tuple(sorted(group_task_indices(g))) for g in groups)
        assert tasks == [(0, 1, 2), (3, 4, 5)]


def test_high_fuzziness_matches_hard_assignment():
    """With a huge exponent the probabilistic assignment concentrates on the
    nearest medoid, so the result must agree with hard nearest-medoid
    clustering run from the same farthest-point initialization.  Distances
    are distinct and well separated so the oracle is unambiguous."""
    n = 6
    within = iter([1, 2, 3, 4, 5, 6])
    between = iter(range(50, 59))
    vals = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            vals[i][j] = vals[j][i] = next(within if (i < 3) == (j < 3) else between)
    ranks = _numerator_matrix(vals)
    pool = _pool_of_singletons(range(n))
    members = list(pool)
    d = np.array(vals, dtype=float)

    for seed in range(8):
        groups = fuzzy_kmedoid(pool, ClusterConfig(2, 50.0), ranks, make_rng(seed))

        rng = make_rng(seed)  # replicate the farthest-point initialization
        medoids = [rng.randrange(n)]
        nearest = d[:, medoids].min(axis=1)
        nearest[medoids] = -1.0
        medoids.append(int(np.argmax(nearest)))
        for _ in range(20):
            assign = np.argmin(d[:, medoids], axis=1)
            new_medoids = []
            for g in range(2):
                idx = np.flatnonzero(assign == g)
                member_sums = d[np.ix_(idx, idx)].sum(axis=1)
                new_medoids.append(int(idx[np.argmin(member_sums)]))
            if new_medoids == medoids:
                break
            medoids = new_medoids
        want = sorted(
            tuple(sorted(int(i) for i in np.flatnonzero(assign == g))) for g in range(2)
        )
        got = sorted(tuple(sorted(members.index(s) for s in g)) for g in groups)
        assert got == want


def test_partition_property_random_pools():
    for seed in range(8):
        inst = generate_instance(14, 9, 14, seed=seed)
        dist = inst.distances()
        ranks = build_rank_matrix(inst, dist)
        from routecut import path_scanning

        sol = path_scanning(inst, dist, make_rng(seed))
        pool = rco_split(sol, ranks, RcoParams(0.3, 0.6), make_rng(seed, 1))
        g = min(3, len(pool))
        groups = fuzzy_kmedoid(pool, ClusterConfig(g, 5.0), ranks, make_rng(seed, 2))
        assert len(groups) == g
        assert all(groups)
        union = Counter()
        for grp in groups:
            for s in grp:
                union.update(s.task_indices())
        assert union == Counter(sol.task_indices())
        # atomicity: each sub-route appears whole in exactly one group
        assert sum(len(grp) for grp in groups) == len(pool)


def test_degenerate_pool_reduces_groups():
    ranks = _numerator_matrix([[0, 2], [2, 0]])
    pool = _pool_of_singletons([0, 1])
    with pytest.warns(UserWarning, match="reducing"):
        groups = fuzzy_kmedoid(pool, ClusterConfig(5, 5.0), ranks, make_rng(1))
    assert len(groups) == 2


# --- virtual tasks ------------------------------------------------------


def test_single_task_virtual_task(single_task_instance):
    dist = single_task_instance.distances()
    pool = SubRoutePool([SubRoute((1,), 0, 0)])
    (vt,) = build_virtual_tasks(pool, single_task_instance, dist)
    assert vt.demand == 5
    assert vt.internal_cost == pytest.approx(1.0)  # just its service cost
    assert (vt.head, vt.tail) == (0, 1)


def test_two_task_virtual_task(path_instance):
    dist = path_instance.distances()
    pool = SubRoutePool([SubRoute((forward_id(0), forward_id(1)), 0, 0)])
    (vt,) = build_virtual_tasks(pool, path_instance, dist)
    # sc(t1) + delta(tail t1, head t2) + sc(t2) = 1 + 0 + 1
    assert vt.internal_cost == pytest.approx(2.0)
    assert (vt.head, vt.tail) == (0, 2)
    assert vt.demand == 2


def test_empty_pool_is_rejected(path_instance):
    with pytest.raises(ValueError):
        build_virtual_tasks(SubRoutePool([]), path_instance, path_instance.distances())


def test_virtual_task_reversal_roundtrip(path_instance):
    dist = path_instance.distances()
    vt = virtual_task_from_ids((forward_id(0), forward_id(1)), path_instance, dist)
    rev = vt.reversed()
    assert (rev.head, rev.tail) == (vt.tail, vt.head)
    assert rev.reversed() == vt
    # reversed internal cost is exact on undirected instances
    recomputed = virtual_task_from_ids(rev.ids, path_instance, dist)
    assert recomputed.internal_cost == pytest.approx(vt.internal_cost)


# --- hierarchical construction -------------------------------------------


def test_hdu_single_task(single_task_instance):
    dist = single_task_instance.distances()
    units = elementary_virtual_tasks(single_task_instance)
    sol = hdu(units, single_task_instance, dist, 0.1, make_rng(0))
    assert validate(sol, single_task_instance) == []
    assert sol.route_count == 1


def test_hdu_everything_fits_one_route():
    inst = make_instance(
        4, [(0, 1, 1, 1, 1), (1, 2, 1, 1, 1), (2, 3, 1, 1, 1)], capacity=50
    )
    units = elementary_virtual_tasks(inst)
    for seed in range(5):
        sol = hdu(units, inst, inst.distances(), 0.4, make_rng(seed))
        assert validate(sol, inst) == []
        assert sol.route_count == 1


def test_hdu_greedy_split_arithmetic():
    # 6 unit-demand tasks, capacity 2 -> exactly 3 routes of load 2, any seed
    edges = [(i, i + 1, 1, 1, 1) for i in range(6)]
    inst = make_instance(7, edges, capacity=2)
    dist = inst.distances()
    units = elementary_virtual_tasks(inst)
    for seed in range(10):
        sol = hdu(units, inst, dist, 0.1, make_rng(seed))
        assert validate(sol, inst) == []
        assert sol.route_count == 3
        assert all(r.load == 2 for r in sol.routes)


def test_hdu_deterministic_under_seed():
    inst = generate_instance(16, 10, 12, seed=2)
    dist = inst.distances()
    units = elementary_virtual_tasks(inst)
    a = hdu(units, inst, dist, 0.1, make_rng(77))
    b = hdu(units, inst, dist, 0.1, make_rng(77))
    assert [r.ids for r in a.routes] == [r.ids for r in b.routes]


def test_hdu_from_split_pool_validates():
    for seed in range(6):
        inst = generate_instance(14, 9, 10, seed=seed)
        dist = inst.distances()
        ranks = build_rank_matrix(inst, dist)
        from routecut import path_scanning

        sol = path_scanning(inst, dist, make_rng(seed))
        pool = rco_split(sol, ranks, RcoParams(0.5, 0.8), make_rng(seed, 3))
        units = build_virtual_tasks(pool, inst, dist)
        rebuilt = hdu(units, inst, dist, 0.1, make_rng(seed, 4))
        assert validate(rebuilt, inst) == []


def test_hdu_cost_above_sanity_bound():
    inst = generate_instance(14, 8, 16, seed=11)
    dist = inst.distances()
    sol = hdu(elementary_virtual_tasks(inst), inst, dist, 0.1, make_rng(5))
    service = sum(t.service_cost for t in inst.tasks)
    # at least one route must leave and return to the depot
    out_back = min(
        dist.cost(inst.depot, t.u) + dist.cost(t.v, inst.depot) for t in inst.tasks
    )
    assert sol.total_cost >= service + out_back - 1e-9


def test_hdu_rejects_partial_cover(path_instance):
    dist = path_instance.distances()
    units = [virtual_task_from_ids((forward_id(0),), path_instance, dist)]
    with pytest.raises(ValueError, match="cover"):
        hdu(units, path_instance, dist, 0.1, make_rng(0))
