from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from stopsim.instances import gen_hadamard_secretary_lb, gen_nm_prophet_lb, random_discrete
from stopsim.nonmonotone import (
    GeneralProphetInstance,
    GeneralSecretaryInstance,
    GeneralSetSystem,
    nm_expected_opt,
    nm_prophet_commitment,
    nm_secretary_opt,
    run_nm_prophet,
    run_nm_secretary,
    subset_of_feasible,
)
from stopsim.setsys import SetSystemError, items_of
from stopsim.valuemodel import ItemDistribution

from _brute import realizations


def test_subset_oracle_examples():
    g = GeneralSetSystem.from_sets([[0, 1]], 3)
    assert subset_of_feasible(g, [])
    assert subset_of_feasible(g, [1])
    assert not subset_of_feasible(g, [2])
    with pytest.raises(SetSystemError):
        subset_of_feasible(g, [5])
    with pytest.raises(SetSystemError):
        GeneralSetSystem.from_sets([], 3)


@pytest.mark.parametrize("seed", range(5))
def test_subset_oracle_matches_scan(seed):
    rng = np.random.default_rng(seed)
    sets = [set(rng.choice(8, size=int(rng.integers(1, 5)), replace=False).tolist()) for _ in range(5)]
    g = GeneralSetSystem.from_sets(sets, 8)
    for k in range(4):
        for S in itertools.combinations(range(8), k):
            assert subset_of_feasible(g, S) == any(set(S) <= f for f in sets)


def test_single_set_commitment():
    g = GeneralSetSystem.from_sets([[1, 2]], 3)
    inst = GeneralProphetInstance(g, (ItemDistribution.point(5.0),) * 3)
    res = run_nm_prophet(inst, [5.0, 5.0, 5.0])
    assert res.selected == (1, 2) and res.value == 10.0


def test_commitment_tie_breaks():
    g = GeneralSetSystem.from_sets([[1, 3], [0, 1], [2]], 4)
    d = (ItemDistribution.point(1.0),) * 4
    # items 0..3 all have mean 1: item 0 wins, lexicographically first set with 0 is {0, 1}
    assert items_of(nm_prophet_commitment(GeneralProphetInstance(g, d))) == (0, 1)


def test_lb_instance_n4_exact_values():
    inst = gen_nm_prophet_lb(4)
    assert inst.gss.as_lists() == [[0, 2], [1, 3]]
    online = sum(p * run_nm_prophet(inst, x).value for x, p in realizations(inst.dists))
    assert online == pytest.approx(0.25, abs=1e-15)
    offline = nm_expected_opt(inst)[0]
    # two late items, each worth 1 with probability 1/4
    assert offline == pytest.approx(float(1 - Fraction(3, 4) ** 2), abs=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_nm_prophet_at_least_opt_over_n(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    sets = [rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist() for _ in range(3)]
    inst = GeneralProphetInstance(GeneralSetSystem.from_sets(sets, n), random_discrete(n, rng))
    online = sum(p * run_nm_prophet(inst, x).value for x, p in realizations(inst.dists))
    assert online >= nm_expected_opt(inst)[0] / n - 1e-12


def test_nm_secretary_examples():
    g = GeneralSetSystem.from_sets([range(4)], 4)
    inst = GeneralSecretaryInstance(g, (1.0, 2.0, 3.0, 4.0))
    assert run_nm_secretary(inst, (2, 0, 1, 3)).value == 10.0
    zero = GeneralSecretaryInstance(g, (0.0,) * 4)
    assert run_nm_secretary(zero, (3, 2, 1, 0)).value == 0.0
    g = GeneralSetSystem.from_sets([[0, 1]], 3)
    assert run_nm_secretary(GeneralSecretaryInstance(g, (1.0, 1.0, 1.0)), (2, 0, 1)).selected == ()


def test_knowledge_models():
    g = GeneralSetSystem.from_sets([[0, 1], [0, 2, 3]], 4)
    inst = GeneralSecretaryInstance(g, (1.0, 1.0, 1.0, 1.0))
    assert run_nm_secretary(inst, (0, 2, 1, 3), "full").selected == (0, 1)
    assert run_nm_secretary(inst, (0, 2, 1, 3), "oracle").selected == (0, 2, 3)
    with pytest.raises(ValueError):
        run_nm_secretary(inst, (0, 1, 2, 3), "psychic")


@pytest.mark.parametrize("knowledge", ["full", "oracle"])
def test_nm_secretary_at_least_opt_over_n(knowledge):
    rng = np.random.default_rng(1)
    for _ in range(5):
        n = int(rng.integers(2, 9))
        sets = [rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist() for _ in range(3)]
        g = GeneralSetSystem.from_sets(sets, n)
        inst = GeneralSecretaryInstance(g, tuple(rng.uniform(0, 5, n).tolist()))
        # only the first arrival matters, so averaging over it is exact
        mean = np.mean([
            run_nm_secretary(inst, (i, *[k for k in range(n) if k != i]), knowledge).value
            for i in range(n)
        ]) if knowledge == "full" else np.mean([
            run_nm_secretary(inst, p, knowledge).value for p in itertools.permutations(range(n))
        ]) if n <= 6 else None
        if mean is not None:
            assert mean >= nm_secretary_opt(inst) / n - 1e-12


def test_hadamard_nm_secretary_exact():
    inst = gen_hadamard_secretary_lb(16, i_star=3)
    n = inst.n
    mean = np.mean([
        run_nm_secretary(inst, (i, *[k for k in range(n) if k != i])).value for i in range(n)
    ])
    assert nm_secretary_opt(inst) == 1.0
    assert mean >= 1.0 / n
