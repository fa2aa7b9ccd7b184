"""Rank-sum testing and win/draw/loss significance tables.

The two-sided rank-sum test uses midranks for ties, exact enumeration of
all rank assignments for combined samples of at most 12 observations, and
the tie-corrected, continuity-corrected normal approximation above that.
Rank sums are manipulated as doubled integers so midrank arithmetic stays
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

EXACT_LIMIT = 12


class WilcoxonResult(NamedTuple):
    statistic: float  # rank sum of the first sample (midranks)
    pvalue: float
    degenerate: bool = False


def _midranks_doubled(values: Sequence[float]) -> list[int]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    doubled = [0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        # ranks i+1..j+1 share the midrank; doubled to keep halves integral
        shared = (i + 1) + (j + 1)
        for k in range(i, j + 1):
            doubled[order[k]] = shared
        i = j + 1
    return doubled


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Two-sided rank-sum test of two independent samples."""
    n, m = len(a), len(b)
    if n < 3 or m < 3:
        raise ValueError("each sample needs at least 3 observations")
    combined = list(a) + list(b)
    if min(combined) == max(combined):
        expected = n * (n + m + 1) / 2.0
        return WilcoxonResult(expected, 1.0, degenerate=True)

    doubled = _midranks_doubled(combined)
    w2 = sum(doubled[:n])  # doubled rank sum of sample a
    total = n + m
    mean2 = n * (total + 1)  # doubled expectation
    observed_dev = abs(w2 - mean2)

    if total <= EXACT_LIMIT:
        hits = 0
        count = 0
        for pick in combinations(range(total), n):
            count += 1
            dev = abs(sum(doubled[i] for i in pick) - mean2)
            if dev >= observed_dev:
                hits += 1
        return WilcoxonResult(w2 / 2.0, hits / count)

    # normal approximation with tie correction and continuity correction
    tie_sum = 0
    for v in set(combined):
        t = combined.count(v)
        tie_sum += t * t * t - t
    variance = (n * m / 12.0) * ((total + 1) - tie_sum / (total * (total - 1)))
    if variance <= 0:
        return WilcoxonResult(w2 / 2.0, 1.0, degenerate=True)
    z = max(0.0, observed_dev / 2.0 - 0.5) / math.sqrt(variance)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return WilcoxonResult(w2 / 2.0, max(p, math.ulp(0.0)))


@dataclass(frozen=True)
class Comparison:
    instance: str
    variant: str
    pvalue: float
    outcome: str  # W | D | L from the reference variant's viewpoint


@dataclass
class SignificanceTable:
    reference: str
    alpha: float
    wdl: dict[str, tuple[int, int, int]]
    detail: list[Comparison]


def significance_table(
    samples: dict[tuple[str, str], list[float]],
    reference: str,
    alpha: float = 0.05,
) -> SignificanceTable:
    """Win/draw/loss counts of a reference variant against every other.

    ``samples`` maps (instance, variant) to final costs over the runs.
    A win on an instance means the reference is significantly better
    (two-sided p below alpha and lower mean cost); a draw means the test
    finds no significant difference.
    """
    instances = sorted({inst for inst, _ in samples})
    variants = sorted({var for _, var in samples})
    if reference not in variants:
        raise ValueError(f"reference variant {reference!r} has no samples")

    for inst in instances:
        lengths = {
            var: len(samples[(inst, var)]) for var in variants if (inst, var) in samples
        }
        if len(set(lengths.values())) > 1:
            offender = max(lengths, key=lambda v: lengths[v])
            raise ValueError(
                f"run counts differ on instance {inst!r} (cell {inst!r}/{offender!r})"
            )

    wdl: dict[str, tuple[int, int, int]] = {}
    detail: list[Comparison] = []
    for var in variants:
        if var == reference:
            continue
        w = d = l = 0
        for inst in instances:
            ref = samples.get((inst, reference))
            other = samples.get((inst, var))
            if ref is None or other is None:
                continue
            res = wilcoxon_rank_sum(ref, other)
            if res.pvalue < alpha:
                ref_mean = sum(ref) / len(ref)
                other_mean = sum(other) / len(other)
                if ref_mean < other_mean:
                    outcome = "W"
                    w += 1
                elif ref_mean > other_mean:
                    outcome = "L"
                    l += 1
                else:
                    outcome = "D"
                    d += 1
            else:
                outcome = "D"
                d += 1
            detail.append(Comparison(inst, var, res.pvalue, outcome))
        wdl[var] = (w, d, l)
    return SignificanceTable(reference, alpha, wdl, detail)
