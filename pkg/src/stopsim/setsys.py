"""Downward-closed set systems stored as an antichain of maximal sets.

Item sets are Python ints used as bitmasks (bit ``i`` set iff item ``i`` is in
the set), so there is no width limit.  A dense boolean membership matrix is
kept alongside for vectorised optimum queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# Compares below every real number; returned when no feasible superset exists.
NEG_SENTINEL = float("-inf")


class SetSystemError(ValueError):
    """Bad input to a set-system constructor or query."""


class ContractViolation(ValueError):
    """A documented precondition of an operation does not hold."""


def mask_of(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << int(i)
    return m


def items_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def as_mask(s: int | Iterable[int]) -> int:
    """Accept either a bitmask or an iterable of item indices."""
    if isinstance(s, (int, np.integer)):
        return int(s)
    return mask_of(s)


@dataclass(frozen=True)
class SetSystem:
    """Canonical downward-closed family over items ``0..n-1``.

    ``maximal_sets`` holds bitmasks sorted lexicographically by their sorted
    index sequence.  The empty set is always implicitly feasible.
    """

    n: int
    maximal_sets: tuple[int, ...]
    _sorted_items: tuple[tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_sorted_items", tuple(items_of(m) for m in self.maximal_sets)
        )

    @cached_property
    def membership(self) -> np.ndarray:
        """Boolean matrix, one row per maximal set."""
        mat = np.zeros((len(self.maximal_sets), self.n), dtype=bool)
        for r, its in enumerate(self._sorted_items):
            mat[r, list(its)] = True
        return mat

    def set_items(self, k: int) -> tuple[int, ...]:
        return self._sorted_items[k]

    def supersets_of(self, W: int) -> list[int]:
        """Row indices of the maximal sets containing ``W``."""
        return [k for k, m in enumerate(self.maximal_sets) if m & W == W]

    def as_lists(self) -> list[list[int]]:
        return [list(s) for s in self._sorted_items]


def _lex_key(mask: int) -> tuple[int, ...]:
    return items_of(mask)


def canonicalize(raw_sets: Sequence[int | Iterable[int]], n: int) -> SetSystem:
    """Build a :class:`SetSystem` from arbitrary generating sets.

    Duplicates and sets contained in another set are dropped.  If every input
    set is empty the family is just ``{∅}``, represented by one empty maximal
    set.
    """
    if n < 0:
        raise SetSystemError("n must be non-negative")
    masks = []
    for s in raw_sets:
        m = as_mask(s)
        if m < 0 or m >> n:
            raise SetSystemError(f"set {items_of(m) if m >= 0 else s} has an index outside [0, {n})")
        masks.append(m)
    if not masks:
        raise SetSystemError("a set system needs at least one generating set")
    uniq = sorted(set(masks), key=popcount, reverse=True)
    kept: list[int] = []
    for m in uniq:
        if not any(m & k == m for k in kept):
            kept.append(m)
    nonempty = [m for m in kept if m]
    kept = nonempty if nonempty else [0]
    kept.sort(key=_lex_key)
    return SetSystem(n=n, maximal_sets=tuple(kept))


def _check_range(ss: SetSystem, S: int) -> None:
    if S >> ss.n:
        raise SetSystemError(f"item set {items_of(S)} has an index >= n={ss.n}")


def is_feasible(ss: SetSystem, S: int | Iterable[int]) -> bool:
    S = as_mask(S)
    _check_range(ss, S)
    return any(S & m == S for m in ss.maximal_sets)


def feasible_extensions(ss: SetSystem, W: int | Iterable[int]) -> int:
    """Items ``j`` outside ``W`` such that ``W + j`` is still feasible (bitmask)."""
    W = as_mask(W)
    _check_range(ss, W)
    union = 0
    found = False
    for m in ss.maximal_sets:
        if m & W == W:
            union |= m
            found = True
    if not found:
        raise ContractViolation(f"W={items_of(W)} is not feasible")
    return union & ~W


def offline_opt(ss: SetSystem, values: Sequence[float]) -> tuple[float, int]:
    """Best total value of a feasible set and the lexicographically first witness.

    Values are assumed non-negative, so the optimum is attained on a maximal set.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (ss.n,):
        raise SetSystemError(f"expected {ss.n} values, got shape {v.shape}")
    totals = ss.membership @ v if ss.n else np.zeros(len(ss.maximal_sets))
    k = int(np.argmax(totals))
    return float(totals[k]), ss.maximal_sets[k]


def offline_opt_containing(
    ss: SetSystem,
    W: int | Iterable[int],
    T: int | Iterable[int],
    values: Sequence[float],
) -> float:
    """Best value over feasible ``S`` with ``W ⊆ S ⊆ T``; ``NEG_SENTINEL`` if none."""
    W, T = as_mask(W), as_mask(T)
    if W & ~T:
        raise ContractViolation(f"W={items_of(W)} is not a subset of T={items_of(T)}")
    best = NEG_SENTINEL
    for m in ss.maximal_sets:
        if m & W == W:
            tot = sum(values[i] for i in items_of(m & T))
            if tot > best:
                best = float(tot)
    return best


def max_feasible_cardinality(ss: SetSystem) -> int:
    return max(popcount(m) for m in ss.maximal_sets)


def contract(ss: SetSystem, W: int, keep: Sequence[int]) -> SetSystem:
    """System on ``keep`` (reindexed 0..len-1) of sets ``S`` with ``S ∪ W`` feasible."""
    pos = {item: k for k, item in enumerate(keep)}
    raw = []
    for m in ss.maximal_sets:
        if m & W == W:
            raw.append([pos[i] for i in items_of(m) if i in pos])
    if not raw:
        raise ContractViolation(f"W={items_of(W)} is not feasible")
    return canonicalize(raw, len(keep))
