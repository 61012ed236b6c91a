"""Commit-to-one-set algorithms for feasibility families with no closure property."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .results import RunResult
from .setsys import SetSystemError, as_mask, items_of
from .valuemodel import DEFAULT_GUARD, ItemDistribution, enumerate_outcomes, sample_matrix


@dataclass(frozen=True)
class GeneralSetSystem:
    """Explicit list of feasible sets (bitmasks), in lexicographic order."""

    n: int
    feasible_sets: tuple[int, ...]

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int] | int], n: int) -> "GeneralSetSystem":
        masks = sorted({as_mask(s) for s in sets}, key=items_of)
        if not masks:
            raise SetSystemError("need at least one feasible set")
        for m in masks:
            if m >> n:
                raise SetSystemError(f"set {items_of(m)} has an index outside [0, {n})")
        return cls(n, tuple(masks))

    @property
    def membership(self) -> np.ndarray:
        mat = np.zeros((len(self.feasible_sets), self.n), dtype=bool)
        for r, m in enumerate(self.feasible_sets):
            mat[r, list(items_of(m))] = True
        return mat

    def as_lists(self) -> list[list[int]]:
        return [list(items_of(m)) for m in self.feasible_sets]


@dataclass(frozen=True)
class GeneralProphetInstance:
    gss: GeneralSetSystem
    dists: tuple[ItemDistribution, ...]

    @property
    def n(self) -> int:
        return self.gss.n


@dataclass(frozen=True)
class GeneralSecretaryInstance:
    gss: GeneralSetSystem
    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return self.gss.n


def subset_of_feasible(gss: GeneralSetSystem, S) -> bool:
    S = as_mask(S)
    if S >> gss.n:
        raise SetSystemError(f"item set {items_of(S)} has an index >= n={gss.n}")
    return any(S & f == S for f in gss.feasible_sets)


def first_set_containing(gss: GeneralSetSystem, item: int) -> int | None:
    for f in gss.feasible_sets:
        if f >> item & 1:
            return f
    return None


def nm_prophet_commitment(inst: GeneralProphetInstance) -> int | None:
    """Feasible set fixed before any value is seen.

    Among items lying in some feasible set, take the one with the largest mean
    (lowest index on ties) and the lexicographically first set holding it.
    """
    covered = 0
    for f in inst.gss.feasible_sets:
        covered |= f
    cands = items_of(covered)
    if not cands:
        return None
    best = max(cands, key=lambda i: (inst.dists[i].mean, -i))
    return first_set_containing(inst.gss, best)


def run_nm_prophet(
    inst: GeneralProphetInstance,
    realization: Sequence[float],
    commitment: int | None = None,
) -> RunResult:
    if commitment is None:
        commitment = nm_prophet_commitment(inst)
    if commitment is None:
        return RunResult("nm-prophet", (), 0.0)
    sel = items_of(commitment)
    return RunResult("nm-prophet", sel, math.fsum(realization[i] for i in sel))


def run_nm_secretary(
    inst: GeneralSecretaryInstance,
    order: Sequence[int],
    knowledge: str = "full",
) -> RunResult:
    """Take the first arrival and complete a feasible set containing it.

    ``full`` commits to the lexicographically first feasible set holding the
    first arrival.  ``oracle`` only asks whether the current selection plus the
    new arrival is a subset of some feasible set and adds it if so; because the
    first arrival precedes everything else this always ends on a feasible set.
    """
    gss, y = inst.gss, inst.values
    if not len(order):
        return RunResult("nm-secretary", (), 0.0)
    first = int(order[0])
    if knowledge == "full":
        f = first_set_containing(gss, first)
        if f is None:
            return RunResult("nm-secretary", (), 0.0)
        sel = items_of(f)
    elif knowledge == "oracle":
        if not subset_of_feasible(gss, 1 << first):
            return RunResult("nm-secretary", (), 0.0)
        W = 1 << first
        for i in order[1:]:
            if subset_of_feasible(gss, W | (1 << int(i))):
                W |= 1 << int(i)
        sel = items_of(W)
    else:
        raise ValueError(f"unknown knowledge model {knowledge!r}")
    return RunResult("nm-secretary", sel, math.fsum(y[i] for i in sel), flags={"knowledge": knowledge})


def nm_expected_opt(
    inst: GeneralProphetInstance,
    mode: str = "exact",
    samples: int = 10_000,
    rng: np.random.Generator | None = None,
    guard: int = DEFAULT_GUARD,
) -> tuple[float, float]:
    """E[max over feasible sets of the set's value], as (estimate, 95% halfwidth)."""
    mem = inst.gss.membership.T.astype(float)
    if mode == "exact":
        total = 0.0
        for X, w in enumerate_outcomes(inst.dists, guard):
            total += float(w @ (X @ mem).max(axis=1))
        return total, 0.0
    rng = rng if rng is not None else np.random.default_rng()
    v = (sample_matrix(inst.dists, samples, rng) @ mem).max(axis=1)
    return float(v.mean()), float(1.96 * v.std(ddof=1) / math.sqrt(samples))


def nm_secretary_opt(inst: GeneralSecretaryInstance) -> float:
    y = np.asarray(inst.values, dtype=float)
    return float((inst.gss.membership.astype(float) @ y).max())
