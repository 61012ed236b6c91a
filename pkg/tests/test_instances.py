from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from stopsim.instances import (
    GeneratorError,
    gen_hadamard_secretary_lb,
    gen_nm_prophet_lb,
    gen_partition_lb,
    gen_partition_matroid,
    gen_random_downward,
    gen_uniform_matroid,
    hadamard_codewords,
    partition_lb_params,
    random_discrete,
    random_prophet_01,
)
from stopsim.valuemodel import expected_opt


def test_partition_lb_params():
    assert partition_lb_params(16) == (2, 0.5)
    b, p = partition_lb_params(256)
    assert b == 3 and p == 3 / 8


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_partition_blocks_cover(n):
    inst = gen_partition_lb(n)
    blocks = inst.ss.as_lists()
    flat = sorted(i for b in blocks for i in b)
    assert flat == list(range(n))
    b, p = partition_lb_params(n)
    assert max(len(x) for x in blocks) == b
    assert all(d.bernoulli_p == p for d in inst.dists)


def test_partition_lb_guard():
    with pytest.raises(GeneratorError):
        gen_partition_lb(8)
    with pytest.raises(GeneratorError):
        gen_partition_lb(100)


def test_partition_lb_opt_near_formula():
    n = 1024
    target = math.log2(n) / math.log2(math.log2(n))
    opt = expected_opt(gen_partition_lb(n))[0]
    assert abs(opt - target) <= 0.25 * target


def test_nm_lb_structure():
    inst = gen_nm_prophet_lb(4)
    assert inst.gss.as_lists() == [[0, 2], [1, 3]]
    assert [d.mean for d in inst.dists] == [0.0, 0.0, 0.25, 0.25]
    with pytest.raises(GeneratorError):
        gen_nm_prophet_lb(5)


@pytest.mark.parametrize("half", [2, 4, 8, 16, 32])
def test_hadamard_distance(half):
    words = hadamard_codewords(half)
    assert len(words) == half
    for a, b in itertools.combinations(words, 2):
        assert len(a ^ b) == half // 2


def test_hadamard_instance():
    inst = gen_hadamard_secretary_lb(16, i_star=5)
    assert sum(inst.values) == 1.0 and inst.values[8 + 5] == 1.0
    assert len(inst.gss.feasible_sets) == 8
    with pytest.raises(GeneratorError):
        gen_hadamard_secretary_lb(12)
    with pytest.raises(GeneratorError):
        gen_hadamard_secretary_lb(16, i_star=8)


def test_matroids():
    assert len(gen_uniform_matroid(4, 2).maximal_sets) == 6
    assert len(gen_partition_matroid([[0, 1], [2, 3]], [1, 1]).maximal_sets) == 4
    with pytest.raises(GeneratorError):
        gen_uniform_matroid(20, 3)
    with pytest.raises(GeneratorError):
        gen_partition_matroid([range(10), range(10, 20)], [5, 5], max_sets=100)


def test_generators_deterministic():
    a = random_prophet_01(np.random.default_rng(3), 7)
    b = random_prophet_01(np.random.default_rng(3), 7)
    assert a == b
    assert gen_random_downward(6, 4, 3, np.random.default_rng(1)) == gen_random_downward(
        6, 4, 3, np.random.default_rng(1)
    )
    d = random_discrete(20, np.random.default_rng(0))
    assert all(abs(sum(x.probs) - 1) < 1e-12 for x in d)
