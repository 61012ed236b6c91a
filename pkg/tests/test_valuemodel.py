from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from stopsim.instances import gen_partition_lb, random_discrete, gen_random_downward
from stopsim.setsys import canonicalize
from stopsim.valuemodel import (
    GuardExceeded,
    ItemDistribution,
    ProphetInstance,
    SecretaryInstance,
    enumerate_outcomes,
    enumerate_outcomes_rational,
    expected_opt,
    realized_opt,
    sample_matrix,
    support_size_product,
)

from _brute import expected_opt_brute


def test_distribution_validation():
    with pytest.raises(ValueError):
        ItemDistribution((0.0, 1.0), (0.5, 0.4))
    with pytest.raises(ValueError):
        ItemDistribution((1.0, 1.0), (0.5, 0.5))
    with pytest.raises(ValueError):
        ItemDistribution((-1.0,), (1.0,))
    with pytest.raises(ValueError):
        ItemDistribution((), ())
    d = ItemDistribution.from_pairs([[3, 0.25], [0, 0.75]])
    assert d.values == (0.0, 3.0)
    assert d.mean == 0.75
    assert d.prob_at_least(3) == 0.25


def test_bernoulli_edges():
    assert ItemDistribution.bernoulli(0).values == (0.0,)
    assert ItemDistribution.bernoulli(1).bernoulli_p == 1.0
    assert ItemDistribution.bernoulli(0.3).bernoulli_p == 0.3


def test_instance_length_checks():
    ss = canonicalize([[0, 1]], 2)
    with pytest.raises(ValueError):
        ProphetInstance(ss, (ItemDistribution.point(1),))
    with pytest.raises(ValueError):
        SecretaryInstance(ss, (1.0, -1.0))


def test_enumeration_weights_sum_to_one():
    rng = np.random.default_rng(0)
    dists = random_discrete(5, rng)
    total = sum(float(w.sum()) for _, w in enumerate_outcomes(dists, chunk=7))
    assert total == pytest.approx(1.0, abs=1e-12)
    X, ws = enumerate_outcomes_rational(dists)
    assert len(X) == support_size_product(dists)


def test_rational_weights_exact():
    dists = [ItemDistribution.bernoulli(0.1)] * 3
    _, ws = enumerate_outcomes_rational(dists)
    assert sum(ws) == 1
    assert Fraction(1, 1000) in ws


def test_guard():
    dists = [ItemDistribution.bernoulli(0.5)] * 12
    with pytest.raises(GuardExceeded):
        list(enumerate_outcomes(dists, guard=1000))


def test_expected_opt_examples():
    ss = canonicalize([[0, 1]], 2)
    inst = ProphetInstance(ss, (ItemDistribution.bernoulli(0.5),) * 2)
    assert expected_opt(inst)[0] == 1.0
    ss = canonicalize([[0], [1]], 2)
    inst = ProphetInstance(ss, (ItemDistribution.bernoulli(0.5),) * 2)
    assert expected_opt(inst)[0] == 0.75


@pytest.mark.parametrize("seed", range(8))
def test_expected_opt_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    ss = gen_random_downward(n, 4, 3, rng)
    inst = ProphetInstance(ss, random_discrete(n, rng))
    assert expected_opt(inst)[0] == pytest.approx(expected_opt_brute(inst), abs=1e-12)
    est, hw = expected_opt(inst, "mc", samples=20_000, rng=rng)
    assert abs(est - expected_opt_brute(inst)) <= 2 * hw + 1e-9


def test_disjoint_blocks_skip_the_guard():
    inst = gen_partition_lb(64)
    exact = expected_opt(inst, "exact", guard=1 << 10)[0]
    est, hw = expected_opt(inst, "mc", samples=20_000, rng=np.random.default_rng(1))
    assert abs(exact - est) <= 2 * hw


def test_sampling_frequencies():
    d = ItemDistribution((0.0, 2.0, 5.0), (0.2, 0.5, 0.3))
    X = sample_matrix([d], 40_000, np.random.default_rng(3))[:, 0]
    for v, p in d.support:
        assert np.mean(X == v) == pytest.approx(p, abs=0.01)


def test_realized_opt():
    ss = canonicalize([[0, 1], [2]], 3)
    inst = ProphetInstance(ss, (ItemDistribution.point(1),) * 3)
    assert realized_opt(inst, [1.0, 1.0, 3.0]) == 3.0
