"""Lower-bound constructions and random/sanity instance generators.

Logarithms are base 2 throughout.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .nonmonotone import GeneralProphetInstance, GeneralSecretaryInstance, GeneralSetSystem
from .setsys import SetSystem, canonicalize
from .valuemodel import ItemDistribution, ProphetInstance

UNIFORM_MATROID_MAX_N = 16
DEFAULT_MAX_SETS = 100_000


class GeneratorError(ValueError):
    pass


def partition_lb_params(n: int) -> tuple[int, float]:
    """Block size ``round(log n / log log n)`` and item probability ``log log n / log n``."""
    lg = math.log2(n)
    llg = math.log2(lg)
    return max(1, round(lg / llg)), llg / lg


def gen_partition_lb(n: int) -> ProphetInstance:
    """Disjoint blocks of equal Bernoulli items; the last block is shorter when
    the block size does not divide ``n``."""
    if n < 16 or n & (n - 1):
        raise GeneratorError(f"n={n} must be a power of two >= 16")
    b, p = partition_lb_params(n)
    blocks = [range(s, min(n, s + b)) for s in range(0, n, b)]
    ss = canonicalize(blocks, n)
    return ProphetInstance(ss, tuple(ItemDistribution.bernoulli(p) for _ in range(n)))


def gen_nm_prophet_lb(n: int) -> GeneralProphetInstance:
    """Pairs ``{i, n/2+i}`` are the only feasible sets; early items are always 0,
    late items are 1 with probability ``1/n``."""
    if n % 2 or n < 2:
        raise GeneratorError(f"n={n} must be a positive even number")
    half = n // 2
    gss = GeneralSetSystem.from_sets([(i, half + i) for i in range(half)], n)
    dists = tuple(
        ItemDistribution.point(0.0) if i < half else ItemDistribution.bernoulli(1.0 / n)
        for i in range(n)
    )
    return GeneralProphetInstance(gss, dists)


def hadamard_codewords(length: int) -> list[frozenset[int]]:
    """Sylvester binary Hadamard code: word ``i`` has a 1 at ``k`` iff popcount(i & k) is odd."""
    if length < 1 or length & (length - 1):
        raise GeneratorError(f"block length {length} must be a power of two")
    return [
        frozenset(k for k in range(length) if bin(i & k).count("1") % 2)
        for i in range(length)
    ]


def gen_hadamard_secretary_lb(n: int, i_star: int = 0) -> GeneralSecretaryInstance:
    """Feasible sets ``w_i ∪ {n/2+i}``; only the item ``n/2+i_star`` is worth 1."""
    half = n // 2
    if n % 2 or half < 1 or half & (half - 1):
        raise GeneratorError(f"n/2 must be a power of two (n={n})")
    if not 0 <= i_star < half:
        raise GeneratorError(f"i_star={i_star} outside [0, {half})")
    words = hadamard_codewords(half)
    gss = GeneralSetSystem.from_sets([set(w) | {half + i} for i, w in enumerate(words)], n)
    values = tuple(1.0 if i == half + i_star else 0.0 for i in range(n))
    return GeneralSecretaryInstance(gss, values)


def gen_random_downward(
    n: int, num_max_sets: int, max_size: int, rng: np.random.Generator
) -> SetSystem:
    if n < 1 or num_max_sets < 1 or max_size < 1:
        raise GeneratorError("parameters must be positive")
    max_size = min(max_size, n)
    raw = []
    for _ in range(num_max_sets):
        k = int(rng.integers(1, max_size + 1))
        raw.append(rng.choice(n, size=k, replace=False).tolist())
    return canonicalize(raw, n)


def gen_uniform_matroid(n: int, k: int) -> SetSystem:
    if not 0 < k <= n:
        raise GeneratorError(f"need 0 < k <= n (k={k}, n={n})")
    if n > UNIFORM_MATROID_MAX_N:
        raise GeneratorError(f"n={n} exceeds the uniform-matroid guard {UNIFORM_MATROID_MAX_N}")
    return canonicalize(list(itertools.combinations(range(n), k)), n)


def gen_partition_matroid(
    blocks: Sequence[Sequence[int]],
    caps: Sequence[int],
    n: int | None = None,
    max_sets: int = DEFAULT_MAX_SETS,
) -> SetSystem:
    if len(blocks) != len(caps):
        raise GeneratorError("one cap per block")
    if any(c < 1 for c in caps):
        raise GeneratorError("caps must be positive")
    n = n if n is not None else 1 + max(i for b in blocks for i in b)
    per_block = [list(itertools.combinations(sorted(b), min(c, len(b)))) for b, c in zip(blocks, caps)]
    count = math.prod(len(p) for p in per_block)
    if count > max_sets:
        raise GeneratorError(f"{count} maximal sets exceed the guard {max_sets}")
    raw = [sum(parts, ()) for parts in itertools.product(*per_block)]
    return canonicalize(raw, n)


def random_bernoulli(n: int, rng: np.random.Generator, lo: float = 0.05, hi: float = 0.95):
    return tuple(ItemDistribution.bernoulli(float(p)) for p in rng.uniform(lo, hi, n))


def random_discrete(
    n: int, rng: np.random.Generator, max_support: int = 3, max_value: float = 10.0
) -> tuple[ItemDistribution, ...]:
    out = []
    for _ in range(n):
        k = int(rng.integers(1, max_support + 1))
        vals = np.unique(np.round(rng.uniform(0, max_value, k), 3))
        probs = rng.dirichlet(np.ones(len(vals)))
        probs = probs / probs.sum()
        out.append(ItemDistribution(tuple(float(v) for v in vals), tuple(float(p) for p in probs)))
    return tuple(out)


def random_prophet_01(
    rng: np.random.Generator, n: int, num_max_sets: int | None = None,
    max_size: int | None = None, p_range: tuple[float, float] = (0.05, 0.95),
) -> ProphetInstance:
    num = num_max_sets if num_max_sets is not None else int(rng.integers(1, 2 * n + 1))
    size = max_size if max_size is not None else int(rng.integers(1, n + 1))
    ss = gen_random_downward(n, num, size, rng)
    return ProphetInstance(ss, random_bernoulli(n, rng, *p_range))
