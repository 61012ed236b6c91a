"""Item value distributions, instances and the expected offline optimum."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .setsys import SetSystem, offline_opt

DEFAULT_GUARD = 2**20
_PROB_TOL = 1e-12


class GuardExceeded(RuntimeError):
    """Exact enumeration would exceed the configured outcome budget."""


@dataclass(frozen=True)
class ItemDistribution:
    """Finite discrete distribution over non-negative values."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("support must be nonempty")
        if len(self.values) != len(self.probs):
            raise ValueError("values and probs differ in length")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"support values must be distinct: {self.values}")
        if any(v < 0 for v in self.values):
            raise ValueError("support values must be non-negative")
        if any(p < 0 or p > 1 for p in self.probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(math.fsum(self.probs) - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(self.probs)}, not 1")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "ItemDistribution":
        pairs = sorted((float(v), float(p)) for v, p in pairs)
        return cls(tuple(v for v, _ in pairs), tuple(p for _, p in pairs))

    @classmethod
    def bernoulli(cls, p: float) -> "ItemDistribution":
        p = float(p)
        if p <= 0.0:
            return cls((0.0,), (1.0,))
        if p >= 1.0:
            return cls((1.0,), (1.0,))
        return cls((0.0, 1.0), (1.0 - p, p))

    @classmethod
    def point(cls, v: float) -> "ItemDistribution":
        return cls((float(v),), (1.0,))

    @property
    def support(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    @property
    def is_01(self) -> bool:
        return set(self.values) <= {0.0, 1.0}

    @property
    def bernoulli_p(self) -> float:
        if not self.is_01:
            raise ValueError(f"support {self.values} is not within {{0, 1}}")
        return dict(self.support).get(1.0, 0.0)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.support)

    def prob_at_least(self, t: float) -> float:
        return math.fsum(p for v, p in self.support if v >= t)

    def prob_of(self, v: float) -> float:
        return dict(self.support).get(float(v), 0.0)


@dataclass(frozen=True)
class ProphetInstance:
    ss: SetSystem
    dists: tuple[ItemDistribution, ...]

    def __post_init__(self) -> None:
        if len(self.dists) != self.ss.n:
            raise ValueError(f"{len(self.dists)} distributions for n={self.ss.n} items")

    @property
    def n(self) -> int:
        return self.ss.n

    @property
    def is_01(self) -> bool:
        return all(d.is_01 for d in self.dists)


@dataclass(frozen=True)
class SecretaryInstance:
    ss: SetSystem
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.ss.n:
            raise ValueError(f"{len(self.values)} values for n={self.ss.n} items")
        if any(v < 0 for v in self.values):
            raise ValueError("secretary values must be non-negative")

    @property
    def n(self) -> int:
        return self.ss.n


def support_size_product(dists: Sequence[ItemDistribution]) -> int:
    return math.prod(len(d.values) for d in dists)


def _cdf_table(dists: Sequence[ItemDistribution]) -> tuple[np.ndarray, np.ndarray]:
    width = max(len(d.values) for d in dists)
    vals = np.zeros((len(dists), width))
    cdf = np.ones((len(dists), width))
    for i, d in enumerate(dists):
        k = len(d.values)
        vals[i, :k] = d.values
        vals[i, k:] = d.values[-1]
        cdf[i, :k] = np.cumsum(d.probs)
        cdf[i, k - 1 :] = 1.0
    return vals, cdf


def sample_matrix(
    dists: Sequence[ItemDistribution], size: int, rng: np.random.Generator
) -> np.ndarray:
    """``size`` independent draws of the listed items, shape (size, len(dists))."""
    if not dists:
        return np.zeros((size, 0))
    u = rng.random((size, len(dists)))
    vals, cdf = _cdf_table(dists)
    idx = (u[:, :, None] >= cdf[None, :, :]).sum(axis=2)
    idx = np.minimum(idx, vals.shape[1] - 1)
    return np.take_along_axis(vals[None, :, :], idx[:, :, None], axis=2)[:, :, 0]


def sample_realization(inst: ProphetInstance, rng: np.random.Generator) -> np.ndarray:
    return sample_matrix(inst.dists, 1, rng)[0]


def enumerate_outcomes(
    dists: Sequence[ItemDistribution],
    guard: int = DEFAULT_GUARD,
    chunk: int = 1 << 16,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (values, weights) blocks covering the full product distribution."""
    total = support_size_product(dists)
    if total > guard:
        raise GuardExceeded(
            f"exact enumeration needs {total} outcomes (guard {guard}); use mc mode"
        )
    if not dists:
        yield np.zeros((1, 0)), np.ones(1)
        return
    vals = [np.asarray(d.values) for d in dists]
    probs = [np.asarray(d.probs) for d in dists]
    sizes = [len(v) for v in vals]
    # mixed-radix decode of a flat outcome counter
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        X = np.empty((len(flat), len(dists)))
        w = np.ones(len(flat))
        rem = flat
        for i in range(len(dists) - 1, -1, -1):
            digit = rem % sizes[i]
            rem = rem // sizes[i]
            X[:, i] = vals[i][digit]
            w *= probs[i][digit]
        yield X, w


def _rational_support(d: ItemDistribution) -> list[tuple[float, Fraction]]:
    """Decimal-repr fractions, with the last weight closing the sum to exactly 1."""
    head = [(v, Fraction(repr(p))) for v, p in d.support[:-1]]
    return head + [(d.values[-1], 1 - sum((p for _, p in head), Fraction(0)))]


def enumerate_outcomes_rational(
    dists: Sequence[ItemDistribution], guard: int = DEFAULT_GUARD
) -> tuple[np.ndarray, list[Fraction]]:
    """All outcomes with exact rational weights summing to 1."""
    total = support_size_product(dists)
    if total > guard:
        raise GuardExceeded(f"exact enumeration needs {total} outcomes (guard {guard})")
    supports = [_rational_support(d) for d in dists]
    rows, weights = [], []
    for combo in itertools.product(*supports):
        rows.append([v for v, _ in combo])
        w = Fraction(1)
        for _, p in combo:
            w *= p
        weights.append(w)
    return np.asarray(rows, dtype=float).reshape(len(rows), len(dists)), weights


def _disjoint(ss: SetSystem) -> bool:
    seen = 0
    for m in ss.maximal_sets:
        if seen & m:
            return False
        seen |= m
    return True


def _sum_distribution(dists: Sequence[ItemDistribution]) -> dict[float, float]:
    acc = {0.0: 1.0}
    for d in dists:
        nxt: dict[float, float] = {}
        for s, ps in acc.items():
            for v, p in d.support:
                if p:
                    nxt[s + v] = nxt.get(s + v, 0.0) + ps * p
        acc = nxt
    return acc


def _expected_max_disjoint(inst: ProphetInstance) -> float:
    """E[max over blocks of block sum] for pairwise-disjoint maximal sets."""
    blocks = [_sum_distribution([inst.dists[i] for i in inst.ss.set_items(k)])
              for k in range(len(inst.ss.maximal_sets))]
    points = sorted({v for b in blocks for v in b})
    cdfs = []
    for b in blocks:
        keys = sorted(b)
        cum = np.cumsum([b[k] for k in keys])
        cdfs.append((np.asarray(keys), cum))
    prev = 0.0
    out = 0.0
    for v in points:
        F = 1.0
        for keys, cum in cdfs:
            pos = np.searchsorted(keys, v, side="right") - 1
            F *= cum[pos] if pos >= 0 else 0.0
        out += v * (F - prev)
        prev = F
    return out


def opt_values(inst: ProphetInstance, X: np.ndarray) -> np.ndarray:
    """Offline optimum of each realisation row of ``X``."""
    if inst.n == 0:
        return np.zeros(len(X))
    return (X @ inst.ss.membership.T.astype(float)).max(axis=1)


def expected_opt(
    inst: ProphetInstance,
    mode: str = "exact",
    samples: int = 10_000,
    rng: np.random.Generator | None = None,
    guard: int = DEFAULT_GUARD,
) -> tuple[float, float]:
    """Expected offline optimum as (estimate, 95% halfwidth).

    ``exact`` enumerates realisations (halfwidth 0); families of pairwise
    disjoint maximal sets are handled exactly through block-sum distributions
    without the enumeration guard.  ``mc`` averages ``samples`` draws.
    """
    if mode == "exact":
        if _disjoint(inst.ss) and support_size_product(inst.dists) > guard:
            return _expected_max_disjoint(inst), 0.0
        total = 0.0
        for X, w in enumerate_outcomes(inst.dists, guard):
            total += float(w @ opt_values(inst, X))
        return total, 0.0
    if mode == "mc":
        if samples < 2:
            raise ValueError("mc mode needs at least 2 samples")
        rng = rng if rng is not None else np.random.default_rng()
        vals = opt_values(inst, sample_matrix(inst.dists, samples, rng))
        return float(vals.mean()), float(1.96 * vals.std(ddof=1) / math.sqrt(samples))
    raise ValueError(f"unknown mode {mode!r}")


def realized_opt(inst: ProphetInstance, z: Sequence[float]) -> float:
    return offline_opt(inst.ss, z)[0]
