"""Dynamic-target prophet algorithm for {0,1} values and the general-value reduction.

The target probability of a state ``(tau, W, prefix)`` is the chance, over the
unobserved items after ``max(W)``, that some feasible superset of ``W`` is worth
more than ``tau`` when the observed prefix is held fixed.  The per-item variant
additionally pins the skipped items to 0 and the candidate item to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .results import RunResult
from .setsys import (
    ContractViolation,
    SetSystem,
    as_mask,
    feasible_extensions,
    is_feasible,
    items_of,
    max_feasible_cardinality,
)
from .valuemodel import (
    DEFAULT_GUARD,
    ItemDistribution,
    ProphetInstance,
    enumerate_outcomes,
    enumerate_outcomes_rational,
    expected_opt,
    sample_matrix,
    support_size_product,
)

SELECTED_REAL = "selected_real"
SELECTED_HALLUCINATED = "selected_hallucinated"
DECREMENTED_TAU = "decremented_tau"

GOOD_RTOL = 1e-9


def last_index(W: int) -> int:
    return W.bit_length() - 1


@dataclass(frozen=True)
class ProphetState:
    tau: float
    W: int
    prefix: tuple[float, ...]

    @property
    def last_index(self) -> int:
        return last_index(self.W)


@dataclass
class ProphetTraceStep:
    tau_before: float
    pi: float
    G: tuple[int, ...]
    prob_A: float
    event: str
    selected: int | None
    W_before: tuple[int, ...]
    pi_j: dict[int, float] = field(default_factory=dict)


class _Layout:
    """Candidate maximal sets of a state, flattened into (set, future item) pairs."""

    def __init__(self, ss: SetSystem, W: int, prefix: Sequence[float]):
        ell = last_index(W)
        self.ell = ell
        self.cands = ss.supersets_of(W)
        cols, past, starts, ends, seg_of = [], [], [], [], []
        for k in self.cands:
            its = ss.set_items(k)
            past.append(math.fsum(prefix[i] for i in its if i <= ell))
            fut = [i - ell - 1 for i in its if i > ell]
            starts.append(len(cols))
            cols.extend(fut)
            ends.append(len(cols))
            seg_of.extend([len(starts) - 1] * len(fut))
        self.cols = np.asarray(cols, dtype=int)
        self.past = np.asarray(past, dtype=float)
        self.starts = np.asarray(starts, dtype=int)
        self.ends = np.asarray(ends, dtype=int)
        seg = np.asarray(seg_of, dtype=int)
        self.pair_end = self.ends[seg] if len(seg) else np.zeros(0, dtype=int)
        self.pair_past = self.past[seg] if len(seg) else np.zeros(0)
        # group pairs by future item for the per-item reduction
        order = np.argsort(self.cols, kind="stable")
        self.order = order
        sorted_cols = self.cols[order]
        if len(sorted_cols):
            brk = np.flatnonzero(np.r_[True, sorted_cols[1:] != sorted_cols[:-1]])
        else:
            brk = np.zeros(0, dtype=int)
        self.group_starts = brk
        self.group_items = sorted_cols[brk] + ell + 1 if len(brk) else np.zeros(0, dtype=int)

    def events(self, X: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
        """Per-outcome indicators for the target event and each item's event."""
        R = X.shape[0]
        if not self.cands:
            return np.zeros(R, dtype=bool), np.zeros((R, 0), dtype=bool)
        Gm = X[:, self.cols] if len(self.cols) else np.zeros((R, 0))
        rc = np.zeros((R, len(self.cols) + 1))
        if len(self.cols):
            rc[:, :-1] = np.cumsum(Gm[:, ::-1], axis=1)[:, ::-1]
        set_tot = self.past[None, :] + rc[:, self.starts] - rc[:, self.ends]
        hit = set_tot.max(axis=1) > tau
        if not len(self.cols):
            return hit, np.zeros((R, 0), dtype=bool)
        after_j = rc[:, :-1] - rc[:, self.pair_end] - Gm
        pair_hit = (self.pair_past[None, :] + 1.0 + after_j) > tau
        per_item = np.logical_or.reduceat(pair_hit[:, self.order], self.group_starts, axis=1)
        return hit, per_item


class ProphetOracle:
    """Target-probability oracle in ``exact``, ``rational`` or ``mc`` mode.

    In mc mode one batch of future samples is shared by the target probability
    and every per-item probability of a state.  Exact results are memoised.
    """

    def __init__(
        self,
        inst: ProphetInstance,
        mode: str = "exact",
        samples: int = 2000,
        rng: np.random.Generator | None = None,
        guard: int = DEFAULT_GUARD,
    ):
        if mode not in ("exact", "rational", "mc"):
            raise ValueError(f"unknown oracle mode {mode!r}")
        self.inst = inst
        self.mode = mode
        self.samples = samples
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.guard = guard
        self._cache: dict = {}

    @classmethod
    def parse(
        cls, spec: "str | ProphetOracle", inst: ProphetInstance,
        rng: np.random.Generator | None = None, guard: int = DEFAULT_GUARD,
    ) -> "ProphetOracle":
        if isinstance(spec, ProphetOracle):
            return spec
        if spec.startswith("mc"):
            _, _, num = spec.partition(":")
            return cls(inst, "mc", samples=int(num) if num else 2000, rng=rng, guard=guard)
        return cls(inst, spec, guard=guard)

    @property
    def deterministic(self) -> bool:
        return self.mode != "mc"

    def state_probs(
        self, W: int, prefix: Sequence[float], tau: float
    ) -> tuple[float, dict[int, float]]:
        """Target probability and the per-item probabilities of all feasible future items."""
        ell = last_index(W)
        key = (W, tuple(prefix[: ell + 1]), tau)
        if self.mode != "mc" and key in self._cache:
            return self._cache[key]
        lay = _Layout(self.inst.ss, W, prefix)
        fut = self.inst.dists[ell + 1 :]
        items = [int(j) for j in lay.group_items]
        if self.mode == "mc":
            X = sample_matrix(fut, self.samples, self.rng)
            hit, per = lay.events(X, tau)
            pi = float(hit.mean())
            pj = per.mean(axis=0)
            out = (pi, {j: float(p) for j, p in zip(items, pj)})
        elif self.mode == "exact":
            pi = 0.0
            pj = np.zeros(len(items))
            for X, w in enumerate_outcomes(fut, self.guard):
                hit, per = lay.events(X, tau)
                pi += float(w @ hit)
                pj += w @ per
            out = (min(pi, 1.0), {j: float(min(p, 1.0)) for j, p in zip(items, pj)})
        else:
            X, weights = enumerate_outcomes_rational(fut, self.guard)
            hit, per = lay.events(X, tau)
            pi = sum((w for w, h in zip(weights, hit) if h), Fraction(0))
            pjs = {}
            for c, j in enumerate(items):
                pjs[j] = sum((w for w, h in zip(weights, per[:, c]) if h), Fraction(0))
            out = (pi, pjs)
        if self.mode != "mc":
            self._cache[key] = out
        return out


def _check_prefix(inst: ProphetInstance, W: int, prefix: Sequence[float]) -> None:
    if len(prefix) < last_index(W) + 1:
        raise ContractViolation("prefix must cover every item up to max(W)")


def pi_exact(
    inst: ProphetInstance,
    W,
    prefix: Sequence[float],
    tau: float,
    guard: int = DEFAULT_GUARD,
    rational: bool = False,
) -> float:
    W = as_mask(W)
    _check_prefix(inst, W, prefix)
    if not is_feasible(inst.ss, W):
        return 0.0
    oracle = ProphetOracle(inst, "rational" if rational else "exact", guard=guard)
    return oracle.state_probs(W, prefix, tau)[0]


def pi_mc(
    inst: ProphetInstance,
    W,
    prefix: Sequence[float],
    tau: float,
    samples: int,
    rng: np.random.Generator,
) -> float:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    W = as_mask(W)
    _check_prefix(inst, W, prefix)
    oracle = ProphetOracle(inst, "mc", samples=samples, rng=rng)
    return oracle.state_probs(W, prefix, tau)[0]


def pi_j(
    inst: ProphetInstance,
    W,
    prefix: Sequence[float],
    tau: float,
    j: int,
    guard: int = DEFAULT_GUARD,
) -> float:
    W = as_mask(W)
    if j <= last_index(W):
        raise ContractViolation(f"j={j} must come after the last selected item {last_index(W)}")
    _check_prefix(inst, W, prefix)
    if not is_feasible(inst.ss, W | (1 << j)):
        return 0.0
    _, pjs = ProphetOracle(inst, "exact", guard=guard).state_probs(W, prefix, tau)
    return pjs.get(j, 0.0)


def good_set(
    inst: ProphetInstance,
    state: ProphetState,
    pi: float,
    pi_js: dict[int, float] | None = None,
    rtol: float = GOOD_RTOL,
) -> int:
    """Feasible future items whose per-item probability is at least ``pi / n**2``.

    Items with per-item probability 0 are never good, which only matters when
    ``pi`` itself is 0.  ``rtol`` is ignored for exact rational inputs.
    """
    W = state.W
    if pi_js is None:
        _, pi_js = ProphetOracle(inst, "exact").state_probs(W, state.prefix, state.tau)
    ext = feasible_extensions(inst.ss, W)
    ell = last_index(W)
    thresh = pi / (inst.n**2)
    if not isinstance(thresh, Fraction):
        thresh = thresh * (1.0 - rtol)
    G = 0
    for j, p in pi_js.items():
        if j > ell and ext >> j & 1 and p > 0 and p >= thresh:
            G |= 1 << j
    return G


def prob_A(inst: ProphetInstance, G) -> float:
    """Chance that at least one item of ``G`` realises 1."""
    G = as_mask(G)
    q = 1.0
    for j in items_of(G):
        d = inst.dists[j]
        if not d.is_01:
            raise ContractViolation(f"item {j} has support {d.values}, not within {{0, 1}}")
        q *= 1.0 - d.bernoulli_p
    return 1.0 - q


def run_prophet_01(
    inst: ProphetInstance,
    realization: Sequence[float],
    oracle: "str | ProphetOracle" = "exact",
    opt_value: float | None = None,
    rng: np.random.Generator | None = None,
    keep_trace: bool = True,
) -> tuple[RunResult, list[ProphetTraceStep]]:
    """Run the dynamic-target algorithm on one realisation.

    The target starts at half the expected optimum and only ever drops by 1.
    While it exceeds ``|W|``: if a good item is likely (chance >= 1/3) to be 1,
    items are revealed until the first good item with value 1 is selected; if
    none shows up the last good item is selected anyway and the target drops.
    Otherwise the target drops.
    """
    if not inst.is_01:
        raise ContractViolation("run_prophet_01 needs every support within {0, 1}")
    orc = ProphetOracle.parse(oracle, inst, rng=rng)
    if opt_value is None:
        opt_value = expected_opt(inst)[0]
    z = [float(v) for v in realization]
    n = inst.n
    tau = opt_value / 2.0
    W = 0
    hallucinated = 0
    trace: list[ProphetTraceStep] = []
    while tau > W.bit_count():
        pi, pjs = orc.state_probs(W, z, tau)
        state = ProphetState(tau, W, tuple(z[: last_index(W) + 1]))
        G = good_set(inst, state, pi, pjs)
        pA = prob_A(inst, G)
        tau_before = tau
        chosen = None
        if pA >= 1.0 / 3.0:
            good = items_of(G)
            chosen = next((j for j in good if z[j] == 1.0), None)
            if chosen is None:
                chosen = good[-1]
                tau -= 1.0
                hallucinated += 1
                event = SELECTED_HALLUCINATED
            else:
                event = SELECTED_REAL
        else:
            tau -= 1.0
            event = DECREMENTED_TAU
        if keep_trace:
            trace.append(
                ProphetTraceStep(
                    tau_before=tau_before,
                    pi=float(pi),
                    G=items_of(G),
                    prob_A=pA,
                    event=event,
                    selected=chosen,
                    W_before=items_of(W),
                    pi_j={j: float(p) for j, p in pjs.items()},
                )
            )
        if chosen is not None:
            W |= 1 << chosen
    selected = items_of(W)
    res = RunResult(
        algorithm="prophet01",
        selected=selected,
        value=math.fsum(z[i] for i in selected),
        hallucinated_count=hallucinated,
        flags={"oracle": orc.mode, "opt_value": opt_value, "final_tau": tau},
    )
    return res, trace


# ---------------------------------------------------------------- general values


def tail_mass(inst: ProphetInstance, opt_value: float) -> float:
    """Sum of Pr[X_i >= 2 * opt_value] over items that are feasible on their own.

    Items outside every feasible set never contribute to the optimum, so they
    are left out.
    """
    covered = 0
    for m in inst.ss.maximal_sets:
        covered |= m
    return math.fsum(
        d.prob_at_least(2.0 * opt_value) for i, d in enumerate(inst.dists) if covered >> i & 1
    )


def run_tail(
    inst: ProphetInstance, realization: Sequence[float], opt_value: float
) -> RunResult:
    """Take every item worth at least twice the expected optimum, if still feasible."""
    if opt_value <= 0:
        raise ValueError("opt_value must be positive")
    W = 0
    skipped = 0
    for i, v in enumerate(realization):
        if v >= 2.0 * opt_value:
            if is_feasible(inst.ss, W | (1 << i)):
                W |= 1 << i
            else:
                skipped += 1
    sel = items_of(W)
    return RunResult(
        algorithm="tail",
        selected=sel,
        value=math.fsum(realization[i] for i in sel),
        skipped_infeasible=skipped,
    )


@dataclass
class CorePlan:
    """Chosen value interval and the {0,1} instance it induces."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    contributions: tuple[float, ...]
    chosen: int
    sub: ProphetInstance
    sub_opt: float

    @property
    def floor(self) -> float:
        return self.lows[self.chosen]


def core_intervals(opt_value: float, r: int) -> tuple[list[float], list[float]]:
    """Dyadic intervals from ``opt/(2r)`` up to ``2*opt``; the last one is closed."""
    k = max(0, math.ceil(math.log2(r))) + 2
    base = opt_value / (2.0 * r)
    lows = [base * 2**i for i in range(k)]
    highs = [min(2.0 * lo, 2.0 * opt_value) for lo in lows]
    return lows, highs


def interval_index(v: float, lows: Sequence[float], highs: Sequence[float]) -> int:
    """Index of the interval holding ``v`` or -1."""
    for i, (lo, hi) in enumerate(zip(lows, highs)):
        last = i == len(lows) - 1
        if lo <= v < hi or (last and lo <= v <= hi):
            return i
    return -1


def core_contributions(
    inst: ProphetInstance,
    opt_value: float,
    lows: Sequence[float],
    highs: Sequence[float],
    mode: str = "exact",
    samples: int = 20_000,
    rng: np.random.Generator | None = None,
    guard: int = DEFAULT_GUARD,
) -> list[float]:
    """Expected value each interval contributes to the optimum with values above ``2*opt`` removed.

    The optimum set of each truncated realisation is the lexicographically first
    witness; its value is split by the interval of each member.
    """
    k = len(lows)
    mem = inst.ss.membership.astype(float)

    def split(X: np.ndarray) -> np.ndarray:
        Xt = np.where(X <= 2.0 * opt_value, X, 0.0)
        best = np.argmax(Xt @ mem.T, axis=1)
        inset = mem[best] > 0
        out = np.zeros((len(X), k))
        for c in range(k):
            last = c == k - 1
            hi_ok = Xt <= highs[c] if last else Xt < highs[c]
            sel = inset & (Xt >= lows[c]) & hi_ok
            out[:, c] = (Xt * sel).sum(axis=1)
        return out

    if mode == "exact":
        acc = np.zeros(k)
        for X, w in enumerate_outcomes(inst.dists, guard):
            acc += w @ split(X)
        return acc.tolist()
    rng = rng if rng is not None else np.random.default_rng(0)
    X = sample_matrix(inst.dists, samples, rng)
    return split(X).mean(axis=0).tolist()


def plan_core(
    inst: ProphetInstance,
    opt_value: float,
    mode: str = "exact",
    samples: int = 20_000,
    rng: np.random.Generator | None = None,
    guard: int = DEFAULT_GUARD,
) -> CorePlan:
    if opt_value <= 0:
        raise ValueError("opt_value must be positive")
    r = max(1, max_feasible_cardinality(inst.ss))
    lows, highs = core_intervals(opt_value, r)
    if mode == "exact" and support_size_product(inst.dists) > guard:
        mode = "mc"
    contrib = core_contributions(inst, opt_value, lows, highs, mode, samples, rng, guard)
    chosen = int(np.argmax(contrib))
    sub_dists = []
    for d in inst.dists:
        p = math.fsum(
            pr for v, pr in d.support
            if interval_index(v, lows, highs) == chosen
        )
        sub_dists.append(ItemDistribution.bernoulli(p))
    sub = ProphetInstance(inst.ss, tuple(sub_dists))
    try:
        sub_opt = expected_opt(sub, "exact", guard=guard)[0]
    except RuntimeError:
        sub_opt = expected_opt(sub, "mc", samples=samples, rng=rng)[0]
    return CorePlan(tuple(lows), tuple(highs), tuple(contrib), chosen, sub, sub_opt)


def run_core(
    inst: ProphetInstance,
    realization: Sequence[float],
    opt_value: float,
    oracle: "str | ProphetOracle" = "exact",
    plan: CorePlan | None = None,
    rng: np.random.Generator | None = None,
) -> RunResult:
    """Round the best value interval to {0,1} and run the {0,1} algorithm on it.

    ``value`` is the realised value of the selected items; ``flags['rounded_value']``
    is the count of in-interval selections times the interval floor.
    """
    if plan is None:
        plan = plan_core(inst, opt_value)
    z01 = [
        1.0 if interval_index(v, plan.lows, plan.highs) == plan.chosen else 0.0
        for v in realization
    ]
    if isinstance(oracle, ProphetOracle) and oracle.inst is not plan.sub:
        oracle = oracle.mode if oracle.mode != "mc" else f"mc:{oracle.samples}"
    sub_res, _ = run_prophet_01(plan.sub, z01, oracle, plan.sub_opt, rng=rng, keep_trace=False)
    sel = sub_res.selected
    return RunResult(
        algorithm="core",
        selected=sel,
        value=math.fsum(realization[i] for i in sel),
        hallucinated_count=sub_res.hallucinated_count,
        flags={
            "interval": plan.chosen,
            "interval_floor": plan.floor,
            "rounded_value": plan.floor * sum(z01[i] for i in sel),
        },
    )


def run_prophet_general(
    inst: ProphetInstance,
    realization: Sequence[float],
    opt_value: float,
    policy: str = "randomized_online",
    rng: np.random.Generator | None = None,
    oracle: "str | ProphetOracle" = "exact",
    plan: CorePlan | None = None,
) -> RunResult:
    """Combine the tail and core algorithms.

    ``randomized_online`` flips a fair coin per run.  ``better_of_reported`` runs
    both on the same realisation and keeps the larger value; it is an
    evaluation aid, not an online algorithm, and is flagged as such.
    """
    if policy == "randomized_online":
        rng = rng if rng is not None else np.random.default_rng()
        if rng.random() < 0.5:
            res = run_tail(inst, realization, opt_value)
            branch = "tail"
        else:
            res = run_core(inst, realization, opt_value, oracle, plan, rng=rng)
            branch = "core"
        res.algorithm = "prophet-general"
        res.flags["branch"] = branch
        return res
    if policy == "better_of_reported":
        t = run_tail(inst, realization, opt_value)
        c = run_core(inst, realization, opt_value, oracle, plan, rng=rng)
        best = t if t.value > c.value else c
        return RunResult(
            algorithm="prophet-general",
            selected=best.selected,
            value=best.value,
            hallucinated_count=best.hallucinated_count,
            skipped_infeasible=t.skipped_infeasible,
            flags={
                "better_of_reported": True,
                "tail_value": t.value,
                "core_value": c.value,
                "branch": "tail" if best is t else "core",
            },
        )
    raise ValueError(f"unknown policy {policy!r}")


def realized_value_check(inst: ProphetInstance, res: RunResult, z: Sequence[float]) -> bool:
    return is_feasible(inst.ss, res.selected) and math.isclose(
        res.value, math.fsum(z[i] for i in res.selected), abs_tol=1e-9
    )


__all__ = [
    "ProphetOracle",
    "ProphetState",
    "ProphetTraceStep",
    "CorePlan",
    "pi_exact",
    "pi_mc",
    "pi_j",
    "good_set",
    "prob_A",
    "run_prophet_01",
    "run_tail",
    "run_core",
    "plan_core",
    "run_prophet_general",
    "tail_mass",
]
