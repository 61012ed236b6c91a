"""Runtime invariant suites over generated instances and algorithm traces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..instances import gen_random_downward, random_discrete, random_prophet_01
from ..prophet import ProphetOracle, run_prophet_01, tail_mass
from ..secretary import (
    ArrivalOrder,
    event_indicators,
    paired_order,
    run_secretary_01,
)
from ..setsys import canonicalize, feasible_extensions, items_of, offline_opt
from ..valuemodel import (
    ItemDistribution,
    ProphetInstance,
    SecretaryInstance,
    expected_opt,
    opt_values,
    sample_matrix,
    sample_realization,
)

SUITES = ("doubling", "potential", "ledger", "symmetry", "concentration", "tail-bound")
TOL = 1e-9


@dataclass
class CheckReport:
    suite: str
    seed: int
    instances: int = 0
    checked: dict[str, int] = field(default_factory=dict)
    violations: dict[str, int] = field(default_factory=dict)
    counterexamples: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)

    def record(self, name: str, ok: bool, example: Callable[[], Any] | Any = None) -> None:
        self.checked[name] = self.checked.get(name, 0) + 1
        self.violations.setdefault(name, 0)
        if not ok:
            self.violations[name] += 1
            if name not in self.counterexamples:
                self.counterexamples[name] = example() if callable(example) else example

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def summary(self) -> str:
        lines = [f"suite={self.suite} seed={self.seed} instances={self.instances}"]
        for name in sorted(self.checked):
            lines.append(f"  {name}: checked={self.checked[name]} violations={self.violations[name]}")
            if name in self.counterexamples:
                lines.append(f"    first counterexample: {self.counterexamples[name]}")
        for k, v in self.stats.items():
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def _prophet_suite(params: dict[str, Any], rng: np.random.Generator):
    """Yield (instance, opt, oracle, realisation, result, trace) over the random {0,1} suite."""
    count = params.get("instances", 100)
    lo, hi = params.get("n_min", 4), params.get("n_max", 10)
    reps = params.get("realizations", 20)
    # alternate dense and sparse instances; sparse ones reach the drop branch more often
    ranges = [params["p_range"]] if "p_range" in params else [(0.05, 0.95), (0.02, 0.5)]
    for k in range(count):
        n = int(rng.integers(lo, hi + 1))
        inst = random_prophet_01(rng, n, p_range=ranges[k % len(ranges)])
        opt = expected_opt(inst)[0]
        orc = ProphetOracle(inst, params.get("oracle", "exact"))
        for _ in range(reps):
            z = sample_realization(inst, rng).tolist()
            res, trace = run_prophet_01(inst, z, orc, opt)
            yield inst, opt, orc, z, res, trace


def _describe(inst: ProphetInstance, z, **extra) -> dict[str, Any]:
    return {
        "maximal_sets": inst.ss.as_lists(),
        "p": [d.bernoulli_p for d in inst.dists],
        "z": list(z),
        **extra,
    }


def check_doubling(params: dict[str, Any], seed: int) -> CheckReport:
    """Target drop doubling, bad-item mass and monotonicity of the target probability in tau."""
    rep = CheckReport("doubling", seed)
    rng = np.random.default_rng(seed)
    seen = set()
    for inst, opt, orc, z, res, trace in _prophet_suite(params, rng):
        seen.add(inst)
        n = inst.n
        factor = 3.0 * (1.0 - 1.0 / n)
        for st in trace:
            W = sum(1 << i for i in st.W_before)
            if st.prob_A <= 1.0 / 3.0:
                lower, _ = orc.state_probs(W, z, st.tau_before - 1.0)
                rep.record(
                    "doubling", lower >= factor * st.pi * (1 - TOL) - TOL,
                    lambda: _describe(inst, z, W=st.W_before, tau=st.tau_before, pi=st.pi,
                                      pi_lower=lower, prob_A=st.prob_A),
                )
            ext = feasible_extensions(inst.ss, W)
            ell = max(st.W_before, default=-1)
            bad = math.fsum(
                p for j, p in st.pi_j.items()
                if j > ell and (not ext >> j & 1 or j not in st.G)
            )
            rep.record(
                "bad-item-mass", bad <= st.pi / n * (1 + TOL) + TOL,
                lambda: _describe(inst, z, W=st.W_before, tau=st.tau_before, pi=st.pi, bad=bad),
            )
            higher, _ = orc.state_probs(W, z, st.tau_before + 0.5)
            rep.record(
                "pi-monotone", higher <= st.pi + TOL,
                lambda: _describe(inst, z, W=st.W_before, tau=st.tau_before, pi=st.pi, higher=higher),
            )
    rep.instances = len(seen)
    return rep


def check_potential(params: dict[str, Any], seed: int) -> CheckReport:
    """Potential inequality at every step and the final-size bound, on traces starting at pi >= 1/4."""
    rep = CheckReport("potential", seed)
    rng = np.random.default_rng(seed)
    seen = set()
    eligible = 0
    for inst, opt, orc, z, res, trace in _prophet_suite(params, rng):
        seen.add(inst)
        if not trace or trace[0].pi < 0.25:
            continue
        eligible += 1
        lg = math.log2(inst.n)
        for st in trace:
            lhs = math.log2(st.pi) if st.pi > 0 else -math.inf
            rhs = -2.0 - (2.0 * lg + 1.0) * len(st.W_before) + (opt / 2.0 - st.tau_before)
            rep.record(
                "potential", lhs >= rhs - TOL,
                lambda: _describe(inst, z, W=st.W_before, tau=st.tau_before, pi=st.pi, rhs=rhs),
            )
        bound = (opt - 4.0) / (4.0 * lg + 4.0)
        rep.record(
            "termination-bound", len(res.selected) >= bound - TOL,
            lambda: _describe(inst, z, W=res.selected, opt=opt, bound=bound),
        )
    rep.instances = len(seen)
    rep.stats["eligible_traces"] = eligible
    return rep


def random_secretary_01(rng: np.random.Generator, n: int, p: float | None = None) -> SecretaryInstance:
    ss = gen_random_downward(n, int(rng.integers(1, 2 * n + 1)), int(rng.integers(1, n + 1)), rng)
    p = float(rng.uniform(0.2, 0.9)) if p is None else p
    values = tuple(float(v) for v in (rng.random(n) < p))
    return SecretaryInstance(ss, values)


def check_ledger(params: dict[str, Any], seed: int) -> CheckReport:
    """Per-step ledger, telescoping and selection identities of the {0,1} secretary algorithm."""
    rep = CheckReport("ledger", seed)
    rng = np.random.default_rng(seed)
    count = params.get("instances", 1000)
    n_max = params.get("n_max", 12)
    c_scale = params.get("c_scale", 1.0)
    aborted = 0
    for _ in range(count):
        n = 2 * int(rng.integers(1, n_max // 2 + 1))
        inst = random_secretary_01(rng, n)
        order = ArrivalOrder(tuple(int(i) for i in rng.permutation(n)))
        res, tr = run_secretary_01(inst, order, c_scale)
        ex = lambda: {"maximal_sets": inst.ss.as_lists(), "values": inst.values, "sigma": order.sigma}
        for st in tr.steps:
            rep.record("ledger", st.v_after == st.v_before - st.B + st.G, ex)
        rep.record("selected-value-one", all(inst.values[i] == 1.0 for i in tr.W), ex)
        pos = {item: t + 1 for t, item in enumerate(order.sigma)}
        Bs, Gs = event_indicators(inst.ss, inst.values, order.sigma, tr.W, {w: pos[w] for w in tr.W})
        executed = len(tr.steps)
        rep.record(
            "trace-matches-events",
            Bs[:executed] == [s.B for s in tr.steps] and Gs[:executed] == [s.G for s in tr.steps],
            ex,
        )
        rep.record("selection-identity", len(tr.W) == min(tr.tau, sum(Gs)), ex)
        if tr.aborted:
            aborted += 1
        else:
            rep.record("telescoping", tr.V_U0 == sum(Bs), ex)
    rep.instances = count
    rep.stats["aborted_runs"] = aborted
    return rep


def check_symmetry(params: dict[str, Any], seed: int) -> CheckReport:
    """B_j and G_j counts agree over all pair-swap patterns for fixed (W-hat, its arrival times)."""
    rep = CheckReport("symmetry", seed)
    rng = np.random.default_rng(seed)
    n = params.get("n", 8)
    fixtures = params.get("fixtures", 20)
    swap_guard = params.get("swap_guard", 16)
    if n > swap_guard:
        raise ValueError(f"n={n} exceeds the exhaustive swap guard {swap_guard}")
    half = n // 2
    for _ in range(fixtures):
        inst = random_secretary_01(rng, n)
        perm = rng.permutation(n).tolist()
        pairing = [(perm[2 * j], perm[2 * j + 1]) for j in range(half)]
        _, wit = offline_opt(inst.ss, [1.0] * n)
        members = list(items_of(wit))
        k = int(rng.integers(0, min(len(members), half) + 1))
        W_hat = sorted(rng.choice(members, size=k, replace=False).tolist()) if k else []
        times = rng.choice(np.arange(half + 1, n + 1), size=k, replace=False).tolist()
        times_hat = dict(zip(W_hat, (int(t) for t in times)))
        B_cnt = np.zeros(half, dtype=int)
        G_cnt = np.zeros(half, dtype=int)
        for heads in itertools.product((True, False), repeat=half):
            sigma = paired_order(pairing, heads).sigma
            Bs, Gs = event_indicators(inst.ss, inst.values, sigma, W_hat, times_hat)
            B_cnt += Bs
            G_cnt += Gs
        for j in range(half):
            rep.record(
                "swap-symmetry", B_cnt[j] == G_cnt[j],
                lambda: {"maximal_sets": inst.ss.as_lists(), "values": inst.values,
                         "pairing": pairing, "W_hat": W_hat, "times": times_hat,
                         "j": j + 1, "B": int(B_cnt[j]), "G": int(G_cnt[j])},
            )
    rep.instances = fixtures
    return rep


def block_instance(rng: np.random.Generator, n: int, blocks: int, p_range=(0.3, 0.95)) -> ProphetInstance:
    """Disjoint consecutive blocks of Bernoulli items (exact OPT without enumeration)."""
    cuts = np.linspace(0, n, blocks + 1).astype(int)
    ss = canonicalize([range(cuts[b], cuts[b + 1]) for b in range(blocks)], n)
    return ProphetInstance(ss, tuple(ItemDistribution.bernoulli(float(p)) for p in rng.uniform(*p_range, n)))


def check_concentration(params: dict[str, Any], seed: int) -> CheckReport:
    """Empirical Pr[V >= OPT/2] > 1/4 on instances whose exact OPT is at least 4 log2 n."""
    rep = CheckReport("concentration", seed)
    rng = np.random.default_rng(seed)
    count = params.get("instances", 20)
    samples = params.get("samples", 10_000)
    freqs = []
    while rep.instances < count:
        n = int(rng.choice([32, 48, 64]))
        inst = block_instance(rng, n, int(rng.integers(1, 5)))
        opt = expected_opt(inst, "exact")[0]
        if opt < 4.0 * math.log2(n):
            continue
        rep.instances += 1
        V = opt_values(inst, sample_matrix(inst.dists, samples, rng))
        freq = float(np.mean(V >= opt / 2.0))
        freqs.append(freq)
        rep.record("concentration", freq > 0.25, {"n": n, "opt": opt, "freq": freq})
    rep.stats["min_frequency"] = min(freqs)
    return rep


def check_tail_bound(params: dict[str, Any], seed: int) -> CheckReport:
    """Sum of Pr[X_i >= 2 OPT] stays below ln 2 (random and heavy-tailed instances)."""
    rep = CheckReport("tail-bound", seed)
    rng = np.random.default_rng(seed)
    count = params.get("instances", 200)
    worst = 0.0
    for k in range(count):
        n = int(rng.integers(1, params.get("n_max", 8) + 1))
        ss = gen_random_downward(n, int(rng.integers(1, 2 * n + 1)), int(rng.integers(1, n + 1)), rng)
        if k % 2:
            # rare large values: the regime where the tail sum is largest
            dists = tuple(
                ItemDistribution((0.0, float(v)), (1.0 - float(q), float(q)))
                for v, q in zip(rng.uniform(1, 100, n), rng.uniform(0.001, 0.3, n))
            )
        else:
            dists = random_discrete(n, rng)
        inst = ProphetInstance(ss, dists)
        opt = expected_opt(inst, "exact")[0]
        mass = tail_mass(inst, opt) if opt > 0 else 0.0
        worst = max(worst, mass)
        rep.record("tail-bound", mass <= math.log(2) + TOL,
                   {"maximal_sets": ss.as_lists(), "opt": opt, "mass": mass})
    rep.instances = count
    rep.stats["max_tail_mass"] = worst
    return rep


_SUITES: dict[str, Callable[[dict[str, Any], int], CheckReport]] = {
    "doubling": check_doubling,
    "potential": check_potential,
    "ledger": check_ledger,
    "symmetry": check_symmetry,
    "concentration": check_concentration,
    "tail-bound": check_tail_bound,
}


def check_invariants(suite: str, params: dict[str, Any] | None = None, seed: int = 0) -> CheckReport:
    try:
        fn = _SUITES[suite]
    except KeyError:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}") from None
    return fn(dict(params or {}), seed)
