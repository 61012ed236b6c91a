"""Slow reference implementations used as test oracles.

Everything here enumerates explicitly (all subsets, all realisations) and
shares no code with the package beyond the instance containers.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def all_feasible(maximal_sets, n):
    """Every feasible subset as a frozenset."""
    out = set()
    for m in maximal_sets:
        m = list(m)
        for k in range(len(m) + 1):
            for c in itertools.combinations(m, k):
                out.add(frozenset(c))
    return out


def _fractions(d):
    ps = [Fraction(repr(p)) for p in d.probs[:-1]]
    return list(zip(d.values, ps + [1 - sum(ps, Fraction(0))]))


def realizations(dists, fixed=None, rational=False):
    """(values tuple, probability) over the product distribution; ``fixed`` pins coordinates.

    With ``rational`` the probabilities are Fractions of their decimal repr,
    the last one of each item being 1 minus the others.
    """
    fixed = fixed or {}
    one = Fraction(1) if rational else 1.0
    supports = [
        [(fixed[i], one)] if i in fixed else (_fractions(d) if rational else list(zip(d.values, d.probs)))
        for i, d in enumerate(dists)
    ]
    for combo in itertools.product(*supports):
        w = one
        for _, p in combo:
            w = w * p
        yield tuple(v for v, _ in combo), w


def best_value(family, x, containing=frozenset()):
    vals = [sum(x[i] for i in S) for S in family if containing <= S]
    return max(vals) if vals else -math.inf


def pi_brute(inst, W, prefix, tau, rational=False):
    W = frozenset(W)
    ell = max(W, default=-1)
    fam = all_feasible(inst.ss.as_lists(), inst.n)
    fixed = {i: prefix[i] for i in range(ell + 1)}
    zero = Fraction(0) if rational else 0.0
    return sum(
        (p for x, p in realizations(inst.dists, fixed, rational) if best_value(fam, x, W) > tau),
        zero,
    )


def pi_j_brute(inst, W, prefix, tau, j):
    W = frozenset(W)
    ell = max(W, default=-1)
    fam = all_feasible(inst.ss.as_lists(), inst.n)
    fixed = {i: prefix[i] for i in range(ell + 1)}
    fixed.update({i: 0.0 for i in range(ell + 1, j)})
    fixed[j] = 1.0
    return sum(
        p for x, p in realizations(inst.dists, fixed) if best_value(fam, x, W | {j}) > tau
    )


def expected_opt_brute(inst):
    fam = all_feasible(inst.ss.as_lists(), inst.n)
    return sum(p * best_value(fam, x) for x, p in realizations(inst.dists))


def secretary_v_brute(maximal_sets, n, W, T, y):
    """max over feasible S with W ⊆ S ⊆ T ∪ W of the value of S."""
    fam = all_feasible(maximal_sets, n)
    W, T = frozenset(W), frozenset(T) | frozenset(W)
    vals = [sum(y[i] for i in S) for S in fam if W <= S <= T]
    return max(vals) if vals else -math.inf


def hamming(a, b):
    return len(a ^ b)


def ci_contains(samples, target, z=3.0):
    s = np.asarray(samples, dtype=float)
    se = s.std(ddof=1) / math.sqrt(len(s)) if len(s) > 1 else 0.0
    return abs(s.mean() - target) <= z * se + 1e-12
