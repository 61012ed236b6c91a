"""Single-item rules and the trivial greedy, used as comparison points."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .results import RunResult
from .setsys import SetSystem, is_feasible, items_of
from .valuemodel import ItemDistribution

INV_E = 1.0 / math.e


def classic_secretary(
    values_in_order: Sequence[float], sample_fraction: float = INV_E
) -> int | None:
    """Position (in arrival order) picked by the sample-then-beat rule, or None.

    The first ``ceil(fraction * m)`` arrivals are only observed; afterwards the
    first arrival strictly better than everything seen so far is taken.
    """
    if not 0.0 < sample_fraction < 1.0:
        raise ValueError("sample_fraction must lie in (0, 1)")
    m = len(values_in_order)
    k = math.ceil(sample_fraction * m)
    if k >= m:
        return None
    best = max(values_in_order[:k]) if k else -math.inf
    for t in range(k, m):
        if values_in_order[t] > best:
            return t
    return None


def median_of_max(dists: Sequence[ItemDistribution]) -> float:
    """Largest ``t`` with Pr[max_i X_i >= t] >= 1/2."""
    points = sorted({v for d in dists for v in d.values}, reverse=True)
    for t in points:
        below = math.prod(1.0 - d.prob_at_least(t) for d in dists)
        if 1.0 - below >= 0.5 - 1e-12:
            return t
    return points[-1]


def _threshold_value(dists: Sequence[ItemDistribution], t: float, strict: bool) -> float:
    """Exact expected value of the single-threshold rule, including the last-item fallback."""
    out = 0.0
    reach = 1.0
    for i, d in enumerate(dists):
        take = [(v, p) for v, p in d.support if (v > t if strict else v >= t)]
        if strict and i == len(dists) - 1:
            take += [(v, p) for v, p in d.support if v == t]
        out += reach * math.fsum(v * p for v, p in take)
        reach *= 1.0 - math.fsum(p for _, p in take)
    return out


def threshold_rule(dists: Sequence[ItemDistribution]) -> tuple[float, bool]:
    """Median-of-max threshold and whether to compare strictly.

    With atoms at the threshold neither comparison alone guarantees half of
    E[max], but the better of the two does (some mixture of them stops with
    probability exactly 1/2).  Ties keep the strict rule.
    """
    t = median_of_max(dists)
    strict = _threshold_value(dists, t, True) >= _threshold_value(dists, t, False)
    return t, strict


def classic_prophet_single(
    dists: Sequence[ItemDistribution], realization: Sequence[float]
) -> tuple[int | None, bool]:
    """Fixed threshold at the median of the maximum.

    Takes the first item above the threshold (strictly or not, see
    :func:`threshold_rule`).  Under the strict rule, if nothing was taken the
    last item is taken when it reaches the threshold; the second return value
    reports whether that fallback fired.
    """
    t, strict = threshold_rule(dists)
    for i, v in enumerate(realization):
        if v > t or (not strict and v == t):
            return i, False
    if strict and realization and realization[-1] >= t:
        return len(realization) - 1, True
    return None, False


def greedy(ss: SetSystem, values: Sequence[float], order: Sequence[int] | None = None) -> RunResult:
    """Take every positive arrival that keeps the selection feasible."""
    order = range(ss.n) if order is None else order
    W = 0
    skipped = 0
    for i in order:
        if values[i] > 0:
            if is_feasible(ss, W | (1 << i)):
                W |= 1 << i
            else:
                skipped += 1
    sel = items_of(W)
    return RunResult("greedy", sel, math.fsum(values[i] for i in sel), skipped_infeasible=skipped)


def classic_secretary_run(
    ss: SetSystem, values: Sequence[float], order: Sequence[int], sample_fraction: float = INV_E
) -> RunResult:
    """Single-item secretary used as a set baseline: the pick is kept if feasible alone."""
    t = classic_secretary([values[i] for i in order], sample_fraction)
    if t is None:
        return RunResult("classic-secretary", (), 0.0)
    item = int(order[t])
    if not is_feasible(ss, 1 << item):
        return RunResult("classic-secretary", (), 0.0, skipped_infeasible=1)
    return RunResult("classic-secretary", (item,), float(values[item]))


def classic_prophet_run(
    ss: SetSystem, dists: Sequence[ItemDistribution], realization: Sequence[float]
) -> RunResult:
    """Threshold rule restricted to items that are feasible as singletons."""
    usable = [i for i in range(ss.n) if is_feasible(ss, 1 << i)]
    sub_d = [dists[i] for i in usable]
    sub_z = [float(realization[i]) for i in usable]
    if not usable:
        return RunResult("classic-prophet", (), 0.0)
    pos, fallback = classic_prophet_single(sub_d, sub_z)
    if pos is None:
        return RunResult("classic-prophet", (), 0.0, flags={"fallback": False})
    item = usable[pos]
    return RunResult(
        "classic-prophet", (item,), float(realization[item]), flags={"fallback": fallback}
    )


def expected_max(dists: Sequence[ItemDistribution]) -> float:
    """E[max_i X_i] for independent items, via the product of CDFs."""
    points = sorted({v for d in dists for v in d.values})
    prev = 0.0
    out = 0.0
    for v in points:
        F = math.prod(1.0 - d.prob_at_least(v) + d.prob_of(v) for d in dists)
        out += v * (F - prev)
        prev = F
    return out


def uniform_order(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(n)
