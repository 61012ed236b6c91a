"""Algorithm registry plus exact and Monte Carlo evaluation."""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .. import baselines, nonmonotone, prophet, secretary
from ..nonmonotone import GeneralProphetInstance, GeneralSecretaryInstance
from ..results import RunResult
from ..setsys import is_feasible, offline_opt
from ..valuemodel import (
    DEFAULT_GUARD,
    GuardExceeded,
    ItemDistribution,
    ProphetInstance,
    SecretaryInstance,
    enumerate_outcomes,
    expected_opt,
    sample_matrix,
)
from .io import Instance

THREADS_ENV = "STOPSIM_THREADS"

PROPHET_ALGS = ("prophet01", "tail", "core", "prophet-general", "classic-prophet")
SECRETARY_ALGS = ("secretary01", "secretary-general", "classic-secretary")
ALGORITHMS = PROPHET_ALGS + SECRETARY_ALGS + ("greedy", "nm-prophet", "nm-secretary")


class EvaluationError(RuntimeError):
    pass


@dataclass
class EvalConfig:
    oracle: str = "exact"
    c_scale: float = secretary.DEFAULT_C_SCALE
    policy: str = "randomized_online"
    knowledge: str = "full"
    guard: int = DEFAULT_GUARD
    opt_mode: str = "exact"
    opt_samples: int = 20_000


@dataclass
class Context:
    """Instance plus per-instance precomputation shared by every trial."""

    inst: Instance
    cfg: EvalConfig = field(default_factory=EvalConfig)
    opt_value: float | None = None
    opt_halfwidth: float = 0.0
    _plan: Any = None
    _commit: Any = None
    _oracle: Any = None

    @property
    def prophet_view(self) -> ProphetInstance:
        if isinstance(self.inst, ProphetInstance):
            return self.inst
        if isinstance(self.inst, SecretaryInstance):
            return ProphetInstance(self.inst.ss, tuple(ItemDistribution.point(v) for v in self.inst.values))
        raise EvaluationError("prophet algorithms need a downward-closed instance")

    def ensure_opt(self) -> float:
        if self.opt_value is None:
            self.opt_value, self.opt_halfwidth = instance_opt(self.inst, self.cfg)
        return self.opt_value

    def core_plan(self):
        if self._plan is None:
            self._plan = prophet.plan_core(
                self.prophet_view, self.ensure_opt(), "exact", self.cfg.opt_samples,
                np.random.default_rng(0), self.cfg.guard,
            )
        return self._plan

    def exact_oracle(self):
        if self._oracle is None:
            self._oracle = prophet.ProphetOracle(self.prophet_view, self.cfg.oracle, guard=self.cfg.guard)
        return self._oracle


def instance_opt(inst: Instance, cfg: EvalConfig | None = None) -> tuple[float, float]:
    """Expected offline optimum of any instance type, as (estimate, halfwidth)."""
    cfg = cfg or EvalConfig()
    rng = np.random.default_rng(0)
    if isinstance(inst, ProphetInstance):
        if cfg.opt_mode == "exact":
            try:
                return expected_opt(inst, "exact", guard=cfg.guard)
            except GuardExceeded:
                pass
        return expected_opt(inst, "mc", samples=cfg.opt_samples, rng=rng)
    if isinstance(inst, SecretaryInstance):
        return offline_opt(inst.ss, inst.values)[0], 0.0
    if isinstance(inst, GeneralProphetInstance):
        if cfg.opt_mode == "exact":
            try:
                return nonmonotone.nm_expected_opt(inst, "exact", guard=cfg.guard)
            except GuardExceeded:
                pass
        return nonmonotone.nm_expected_opt(inst, "mc", samples=cfg.opt_samples, rng=rng)
    return nonmonotone.nm_secretary_opt(inst), 0.0


def _values_random(inst: Instance) -> bool:
    return isinstance(inst, (ProphetInstance, GeneralProphetInstance))


def is_deterministic(alg: str, cfg: EvalConfig) -> bool:
    """Whether a run is a function of the realisation and order alone."""
    if alg == "prophet-general":
        return cfg.policy == "better_of_reported" and not cfg.oracle.startswith("mc")
    if alg in ("prophet01", "core"):
        return not cfg.oracle.startswith("mc")
    return alg != "secretary-general"


def needs_order(alg: str, inst: Instance) -> bool:
    if alg in SECRETARY_ALGS or alg == "nm-secretary":
        return True
    if alg == "greedy":
        return not _values_random(inst) or isinstance(inst, SecretaryInstance)
    return False


def run_once(
    ctx: Context,
    alg: str,
    values: Sequence[float],
    order: Sequence[int] | None,
    rng: np.random.Generator,
) -> RunResult:
    """One run of ``alg`` on fixed values (and arrival order when the algorithm uses one)."""
    cfg = ctx.cfg
    inst = ctx.inst
    if alg in ("nm-prophet", "nm-secretary"):
        if alg == "nm-prophet":
            if not isinstance(inst, GeneralProphetInstance):
                raise EvaluationError("nm-prophet needs a general instance with distributions")
            if ctx._commit is None:
                ctx._commit = (nonmonotone.nm_prophet_commitment(inst),)
            return nonmonotone.run_nm_prophet(inst, values, ctx._commit[0])
        if not isinstance(inst, (GeneralProphetInstance, GeneralSecretaryInstance)):
            raise EvaluationError("nm-secretary needs a general instance")
        sec = GeneralSecretaryInstance(inst.gss, tuple(values))
        return nonmonotone.run_nm_secretary(sec, order, cfg.knowledge)
    if isinstance(inst, (GeneralProphetInstance, GeneralSecretaryInstance)):
        raise EvaluationError(f"{alg} needs a downward-closed instance")
    ss = inst.ss
    if alg == "greedy":
        return baselines.greedy(ss, values, order)
    if alg == "classic-secretary":
        return baselines.classic_secretary_run(ss, values, order)
    if alg == "secretary01":
        res, _ = secretary.run_secretary_01(
            SecretaryInstance(ss, tuple(values)), secretary.ArrivalOrder(tuple(order)), cfg.c_scale
        )
        return res
    if alg == "secretary-general":
        return secretary.run_secretary_general(
            SecretaryInstance(ss, tuple(values)), secretary.ArrivalOrder(tuple(order)), rng, cfg.c_scale
        )
    pinst = ctx.prophet_view
    if alg == "classic-prophet":
        return baselines.classic_prophet_run(ss, pinst.dists, values)
    opt = ctx.ensure_opt()
    oracle = ctx.exact_oracle() if not cfg.oracle.startswith("mc") else cfg.oracle
    if alg == "prophet01":
        res, _ = prophet.run_prophet_01(pinst, values, oracle, opt, rng=rng, keep_trace=False)
        return res
    if alg == "tail":
        return prophet.run_tail(pinst, values, opt)
    if alg == "core":
        return prophet.run_core(pinst, values, opt, cfg.oracle, ctx.core_plan(), rng=rng)
    if alg == "prophet-general":
        return prophet.run_prophet_general(
            pinst, values, opt, cfg.policy, rng, cfg.oracle, ctx.core_plan()
        )
    raise EvaluationError(f"unknown algorithm {alg!r}")


def run_is_valid(ctx: Context, res: RunResult, values: Sequence[float]) -> bool:
    """Selected set is feasible and the reported value is its realised total."""
    inst = ctx.inst
    total = math.fsum(values[i] for i in res.selected)
    if not math.isclose(res.value, total, rel_tol=1e-9, abs_tol=1e-9):
        return False
    if isinstance(inst, (GeneralProphetInstance, GeneralSecretaryInstance)):
        if not res.selected:
            return True
        return sum(1 << i for i in res.selected) in inst.gss.feasible_sets
    return is_feasible(inst.ss, res.selected)


def trial_streams(master_seed: int, trial: int) -> tuple[np.random.Generator, ...]:
    """Independent value, order and algorithm streams for one trial."""
    seq = np.random.SeedSequence([master_seed, trial])
    return tuple(np.random.default_rng(s) for s in seq.spawn(3))


@dataclass
class MCSummary:
    mean: float
    halfwidth: float
    trials: int
    values: np.ndarray
    selected_total: int = 0
    hallucinated_total: int = 0
    violations: int = 0


def _trial(ctx: Context, alg: str, master_seed: int, t: int) -> tuple[float, int, int, int]:
    v_rng, o_rng, a_rng = trial_streams(master_seed, t)
    inst = ctx.inst
    if _values_random(inst):
        values = sample_matrix(inst.dists, 1, v_rng)[0].tolist()
    else:
        values = list(inst.values)
    order = o_rng.permutation(inst.n).tolist() if needs_order(alg, inst) else None
    res = run_once(ctx, alg, values, order, a_rng)
    bad = 0 if run_is_valid(ctx, res, values) else 1
    return res.value, len(res.selected), res.hallucinated_count, bad


def _chunk(args: tuple[Context, str, int, int, int]) -> list[tuple[float, int, int, int]]:
    ctx, alg, seed, lo, hi = args
    return [_trial(ctx, alg, seed, t) for t in range(lo, hi)]


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def evaluate_mc(
    ctx: Context | Instance,
    alg: str,
    trials: int,
    master_seed: int = 0,
    workers: int | None = None,
) -> MCSummary:
    """Mean value over ``trials`` independent trials with a 95% normal halfwidth.

    Trial ``t`` draws from streams derived from ``(master_seed, t)`` only, so
    the result does not depend on the number of workers.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if not isinstance(ctx, Context):
        ctx = Context(ctx)
    if alg not in ALGORITHMS:
        raise EvaluationError(f"unknown algorithm {alg!r}")
    if alg in ("prophet01", "core", "prophet-general", "tail"):
        ctx.ensure_opt()
        if alg in ("core", "prophet-general"):
            ctx.core_plan()
    workers = workers or worker_count()
    if workers > 1 and trials >= 4 * workers:
        step = math.ceil(trials / (4 * workers))
        jobs = [(ctx, alg, master_seed, lo, min(trials, lo + step)) for lo in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = [r for part in ex.map(_chunk, jobs) for r in part]
    else:
        out = _chunk((ctx, alg, master_seed, 0, trials))
    vals = np.array([o[0] for o in out], dtype=float)
    mean = float(np.sum(vals) / trials)
    hw = float(1.96 * vals.std(ddof=1) / math.sqrt(trials))
    return MCSummary(
        mean, hw, trials, vals,
        selected_total=sum(o[1] for o in out),
        hallucinated_total=sum(o[2] for o in out),
        violations=sum(o[3] for o in out),
    )


def evaluate_exact(ctx: Context | Instance, alg: str) -> float:
    """Exact expected value of a deterministic algorithm.

    Random values are enumerated against their product distribution; arrival
    orders are enumerated over all ``n!`` permutations with equal weight.
    """
    if not isinstance(ctx, Context):
        ctx = Context(ctx)
    cfg = ctx.cfg
    if alg not in ALGORITHMS:
        raise EvaluationError(f"unknown algorithm {alg!r}")
    if not is_deterministic(alg, cfg):
        raise EvaluationError(f"{alg} is randomized under this configuration; use mc evaluation")
    inst = ctx.inst
    rng = np.random.default_rng(0)
    uses_order = needs_order(alg, inst)
    n = inst.n
    if uses_order and math.factorial(n) > cfg.guard:
        raise GuardExceeded(f"{n}! orders exceed the guard {cfg.guard}; use mc evaluation")
    orders = list(itertools.permutations(range(n))) if uses_order else [None]
    if _values_random(inst):
        outcomes = enumerate_outcomes(inst.dists, max(1, cfg.guard // len(orders)))
    else:
        outcomes = [(np.asarray([inst.values], dtype=float), np.ones(1))]
    total = 0.0
    for X, w in outcomes:
        for row, wt in zip(X, w):
            if wt == 0.0:
                continue
            vals = row.tolist()
            acc = math.fsum(run_once(ctx, alg, vals, o, rng).value for o in orders)
            total += wt * acc / len(orders)
    return float(total)


def competitive_report(
    inst: Instance,
    algorithms: Sequence[str],
    mode: str = "mc",
    trials: int = 1000,
    seed: int = 0,
    instance_id: str = "instance",
    cfg: EvalConfig | None = None,
    workers: int | None = None,
) -> list[dict[str, Any]]:
    """One report row per algorithm: mean value, halfwidth, OPT and ratio OPT/mean."""
    ctx = Context(inst, cfg or EvalConfig())
    opt = ctx.ensure_opt()
    opt_hw = ctx.opt_halfwidth
    rows = []
    for alg in algorithms:
        t0 = time.perf_counter()
        if mode == "exact":
            mean, hw, n_trials, viol = evaluate_exact(ctx, alg), 0.0, 0, 0
        elif mode == "mc":
            s = evaluate_mc(ctx, alg, trials, seed, workers)
            mean, hw, n_trials, viol = s.mean, s.halfwidth, trials, s.violations
        else:
            raise ValueError(f"unknown mode {mode!r}")
        rows.append({
            "instance_id": instance_id,
            "algorithm": alg,
            "mode": mode,
            "trials": n_trials,
            "seed": seed,
            "mean": mean,
            "halfwidth": hw,
            "opt": float(opt),
            "opt_halfwidth": opt_hw,
            "ratio": float(opt / mean) if mean > 0 else math.inf,
            "violations": viol,
            "wall_ms": round(1000 * (time.perf_counter() - t0), 3),
            "guard": ctx.cfg.guard,
        })
    return rows
