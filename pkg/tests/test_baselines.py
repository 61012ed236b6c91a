from __future__ import annotations

import numpy as np
import pytest

from stopsim.baselines import (
    _threshold_value,
    classic_prophet_run,
    classic_prophet_single,
    classic_secretary,
    expected_max,
    greedy,
    median_of_max,
    threshold_rule,
)
from stopsim.instances import gen_partition_lb, random_discrete
from stopsim.setsys import canonicalize
from stopsim.valuemodel import ItemDistribution, sample_matrix

from _brute import realizations


def test_classic_secretary_edges():
    assert classic_secretary([5.0]) is None
    assert classic_secretary([1.0, 2.0, 3.0, 4.0]) == 2
    with pytest.raises(ValueError):
        classic_secretary([1.0, 2.0], 0.0)


def test_classic_secretary_success_rate():
    rng = np.random.default_rng(0)
    m, trials = 60, 20_000
    hits = 0
    for _ in range(trials):
        v = rng.permutation(m).astype(float)
        t = classic_secretary(v)
        hits += t is not None and v[t] == m - 1
    assert hits / trials >= 0.30


def test_median_threshold():
    two = [ItemDistribution.bernoulli(0.5)] * 2
    assert median_of_max(two) == 1.0
    # the non-strict rule is worth 3/4 here, the strict one only 1/2
    assert threshold_rule(two) == (1.0, False)
    assert classic_prophet_single(two, [0.0, 1.0]) == (1, False)
    one = [ItemDistribution.point(3.0)]
    assert classic_prophet_single(one, [3.0]) == (0, True)


@pytest.mark.parametrize("seed", range(5))
def test_classic_prophet_half_of_max(seed):
    rng = np.random.default_rng(seed)
    dists = random_discrete(5, rng)
    ss = canonicalize([[i] for i in range(5)], 5)
    exact = sum(p * classic_prophet_run(ss, dists, x).value for x, p in realizations(dists))
    assert exact >= expected_max(dists) / 2 - 1e-12
    t, strict = threshold_rule(dists)
    assert exact == pytest.approx(_threshold_value(dists, t, strict), abs=1e-12)


def test_expected_max_matches_enumeration():
    rng = np.random.default_rng(3)
    dists = random_discrete(4, rng)
    assert expected_max(dists) == pytest.approx(
        sum(p * max(x) for x, p in realizations(dists)), abs=1e-12
    )


def test_greedy_examples():
    ss = canonicalize([[0, 1, 2]], 3)
    assert greedy(ss, [1.0, 0.0, 1.0]).value == 2.0
    assert greedy(ss, [0.0, 0.0, 0.0]).selected == ()
    exact = sum(p * greedy(ss, x).value for x, p in realizations([ItemDistribution.bernoulli(0.5)] * 3))
    assert exact == pytest.approx(1.5)


def test_greedy_on_partition_lb_below_two():
    inst = gen_partition_lb(256)
    X = sample_matrix(inst.dists, 4000, np.random.default_rng(0))
    vals = [greedy(inst.ss, x).value for x in X]
    assert np.mean(vals) < 2.0
