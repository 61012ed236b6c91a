"""Sliding-window secretary algorithm for {0,1} values and its general-value reduction.

Arrival times are 1-based in the docstrings (time ``t`` holds ``sigma[t-1]``).
The first half of the arrivals forms the window ``U``; during exploitation the
window forgets one early item before each late item is tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import INV_E, classic_secretary
from .results import RunResult
from .setsys import (
    NEG_SENTINEL,
    SetSystem,
    contract,
    is_feasible,
    items_of,
    mask_of,
    max_feasible_cardinality,
    offline_opt_containing,
)
from .valuemodel import SecretaryInstance

DEFAULT_C_SCALE = 500.0


class OddItemCount(ValueError):
    """The secretary algorithms need an even number of items."""


@dataclass(frozen=True)
class ArrivalOrder:
    sigma: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise ValueError(f"{self.sigma} is not a permutation")

    @property
    def n(self) -> int:
        return len(self.sigma)

    def arrival_time(self) -> dict[int, int]:
        """Item -> 1-based arrival time."""
        return {item: t + 1 for t, item in enumerate(self.sigma)}


def sample_order(
    n: int,
    model: str = "uniform",
    rng: np.random.Generator | None = None,
    pairing: Sequence[tuple[int, int]] | None = None,
) -> ArrivalOrder:
    """Uniform permutation, or one fair coin per pair of time slots ``{j, n/2+j}``.

    In the paired model ``pairing[j]`` lists the two items sharing slots
    ``j+1`` and ``n/2+j+1``; heads puts the first listed item in the early slot.
    """
    if n % 2:
        raise OddItemCount(f"n={n} is odd")
    rng = rng if rng is not None else np.random.default_rng()
    if model == "uniform":
        return ArrivalOrder(tuple(int(i) for i in rng.permutation(n)))
    if model == "paired":
        half = n // 2
        if pairing is None:
            pairing = [(j, half + j) for j in range(half)]
        if len(pairing) != half:
            raise ValueError(f"need {half} pairs, got {len(pairing)}")
        coins = rng.random(half) < 0.5
        return paired_order(pairing, coins)
    raise ValueError(f"unknown arrival model {model!r}")


def paired_order(pairing: Sequence[tuple[int, int]], heads: Sequence[bool]) -> ArrivalOrder:
    half = len(pairing)
    sigma = [0] * (2 * half)
    for j, ((a, b), h) in enumerate(zip(pairing, heads)):
        first, second = (a, b) if h else (b, a)
        sigma[j] = int(first)
        sigma[half + j] = int(second)
    return ArrivalOrder(tuple(sigma))


@dataclass
class SecretaryStep:
    j: int
    forgotten: int
    arrived: int
    U_after: tuple[int, ...]
    W_before: tuple[int, ...]
    B: int
    G: int
    v_before: float
    v_after: float
    selected: bool


@dataclass
class SecretaryTrace:
    ss: SetSystem
    values: tuple[float, ...]
    sigma: tuple[int, ...]
    tau: int
    V_U0: float
    steps: list[SecretaryStep] = field(default_factory=list)
    W: tuple[int, ...] = ()
    aborted: bool = False


def secretary_target(V: float, n: int, c_scale: float) -> int:
    """``max(1, floor(V / (c_scale * log2 n)))``."""
    return max(1, math.floor(V / (c_scale * math.log2(n))))


def _vopt(ss: SetSystem, W: int, T: int, y: Sequence[float]) -> float:
    return offline_opt_containing(ss, W, T | W, y)


def run_secretary_01(
    inst: SecretaryInstance,
    order: ArrivalOrder,
    c_scale: float = DEFAULT_C_SCALE,
) -> tuple[RunResult, SecretaryTrace]:
    """Explore the first half, then add a late arrival iff it strictly raises
    the best value of a feasible superset of ``W`` inside ``U ∪ W``."""
    n = inst.n
    if n % 2:
        raise OddItemCount(f"n={n} is odd")
    if set(inst.values) - {0.0, 1.0}:
        raise ValueError("run_secretary_01 needs values in {0, 1}")
    ss, y, sigma = inst.ss, inst.values, order.sigma
    half = n // 2
    U = mask_of(sigma[:half])
    V_U0 = _vopt(ss, 0, U, y)
    tau = secretary_target(V_U0, n, c_scale)
    trace = SecretaryTrace(ss, tuple(y), tuple(sigma), tau, V_U0)
    W = 0
    v = V_U0
    for j in range(1, half + 1):
        early, late = sigma[j - 1], sigma[half + j - 1]
        U &= ~(1 << early)
        base = _vopt(ss, W, U, y)
        B = int(_vopt(ss, W, U | (1 << early), y) > base)
        with_late = _vopt(ss, W | (1 << late), U | (1 << late), y)
        G = int(with_late > base)
        W_before = items_of(W)
        if G:
            W |= 1 << late
        v_after = with_late if G else base
        trace.steps.append(
            SecretaryStep(j, early, late, items_of(U), W_before, B, G, v, v_after, bool(G))
        )
        v = v_after
        if W.bit_count() >= tau:
            trace.aborted = j < half
            break
    trace.W = items_of(W)
    res = RunResult(
        "secretary01",
        trace.W,
        math.fsum(y[i] for i in trace.W),
        flags={"tau": tau, "aborted": trace.aborted, "c_scale": c_scale},
    )
    return res, trace


def event_indicators(
    ss: SetSystem,
    values: Sequence[float],
    sigma: Sequence[int],
    W_hat: Sequence[int],
    times_hat: Mapping[int, int],
) -> tuple[list[int], list[int]]:
    """Bad/good indicators for every exploitation step against a fixed ``(Ŵ, σ̂|Ŵ)``.

    ``times_hat`` maps each item of ``Ŵ`` to its 1-based arrival time under σ̂;
    ``Ŵ_j`` holds the items of ``Ŵ`` arriving at times ``n/2+1 .. n/2+j-1``.
    """
    n = len(sigma)
    half = n // 2
    Bs, Gs = [], []
    for j in range(1, half + 1):
        Wj = mask_of(w for w in W_hat if half + 1 <= times_hat[w] <= half + j - 1)
        Uj = mask_of(sigma[j:half])
        base = _vopt(ss, Wj, Uj, values)
        early, late = sigma[j - 1], sigma[half + j - 1]
        Bs.append(int(_vopt(ss, Wj | (1 << early), Uj | (1 << early), values) > base))
        Gs.append(int(_vopt(ss, Wj | (1 << late), Uj | (1 << late), values) > base))
    return Bs, Gs


def classify_events(
    trace: SecretaryTrace, W_hat: Sequence[int], sigma_hat_on_W: Mapping[int, int]
) -> tuple[list[int], list[int]]:
    if len(W_hat) > trace.tau:
        raise ValueError(f"|Ŵ|={len(W_hat)} exceeds the target {trace.tau}")
    if not is_feasible(trace.ss, W_hat):
        raise ValueError(f"Ŵ={tuple(W_hat)} is not feasible")
    return event_indicators(trace.ss, trace.values, trace.sigma, W_hat, sigma_hat_on_W)


def actual_times(trace: SecretaryTrace) -> dict[int, int]:
    pos = {item: t + 1 for t, item in enumerate(trace.sigma)}
    return {w: pos[w] for w in trace.W}


def bucket_bounds(M: float, r: int) -> list[float]:
    """Lower ends of the buckets, top first: M/2, M/4, ... (``max(1, ceil(log2 r))`` of them)."""
    count = max(1, math.ceil(math.log2(r))) if r > 1 else 1
    return [M / 2 ** (k + 1) for k in range(count)]


def run_secretary_general(
    inst: SecretaryInstance,
    order: ArrivalOrder,
    rng: np.random.Generator | None = None,
    c_scale: float = DEFAULT_C_SCALE,
) -> RunResult:
    """Classic rule on the first half, then a random value bucket rounded to
    {0,1} and the {0,1} algorithm on the second half."""
    n = inst.n
    if n % 2:
        raise OddItemCount(f"n={n} is odd")
    rng = rng if rng is not None else np.random.default_rng()
    ss, y, sigma = inst.ss, inst.values, order.sigma
    half = n // 2
    first = sigma[:half]
    W = 0
    t = classic_secretary([y[i] for i in first], INV_E)
    if t is not None and is_feasible(ss, 1 << first[t]):
        W |= 1 << first[t]
    M = max(y[i] for i in first) if first else 0.0
    r = max(1, max_feasible_cardinality(ss))
    lows = bucket_bounds(M, r)
    b = int(rng.integers(len(lows)))
    lo = lows[b]
    hi = math.inf if b == 0 else 2 * lo

    def in_bucket(v: float) -> bool:
        if M <= 0:
            return v > 0
        return lo <= v < hi if b else v >= lo

    late = list(sigma[half:])
    keep = late + ([] if len(late) % 2 == 0 else [-1])
    real = [i for i in keep if i >= 0]
    sub_ss = contract(ss, W, real)
    m = len(keep)
    if m != len(real):
        # pad to an even count with an isolated zero-value item
        sub_ss = SetSystem(m, sub_ss.maximal_sets)
    sub_vals = tuple(1.0 if i >= 0 and in_bucket(y[i]) else 0.0 for i in keep)
    sub = SecretaryInstance(sub_ss, sub_vals)
    sub_res, _ = run_secretary_01(sub, ArrivalOrder(tuple(range(m))), c_scale)
    for k in sub_res.selected:
        if keep[k] >= 0:
            W |= 1 << keep[k]
    sel = items_of(W)
    return RunResult(
        "secretary-general",
        sel,
        math.fsum(y[i] for i in sel),
        flags={"bucket": b, "buckets": len(lows), "M": M, "c_scale": c_scale},
    )


__all__ = [
    "ArrivalOrder",
    "SecretaryTrace",
    "SecretaryStep",
    "sample_order",
    "paired_order",
    "run_secretary_01",
    "classify_events",
    "event_indicators",
    "run_secretary_general",
    "NEG_SENTINEL",
]
