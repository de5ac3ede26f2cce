"""Monte Carlo ensembles: many sample paths, per-path bounds, aggregate checks.

Paths are embarrassingly parallel; per-path seeds are derived from the base
seed by path index (schedule-independent), and records are always reduced in
path-index order, so the summary is byte-identical for any worker count.
Aborted paths are counted and excluded from the probability estimates.
"""
from __future__ import annotations

import math
import os
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundParams, PathBoundEvaluator, ProbBound, quench_prob_lower, \
    quench_prob_upper, tail_bound_dependent, tail_bound_independent
from .config import BC_ROBIN, EnsembleConfig, SystemConfig
from .fem import simulate
from .noise import Dependence
from .spectral import solve_robin_eigenpair

__all__ = [
    "PathRecord",
    "TheoremVerdict",
    "EnsembleSummary",
    "derive_path_seed",
    "resolve_workers",
    "wilson_interval",
    "run_ensemble",
    "summarize",
    "empirical_quench_prob",
    "check_theorem_consistency",
]

_Z95 = 1.959963984540054


def derive_path_seed(base_seed: int, path_id: int) -> int:
    """Deterministic, schedule-independent per-path seed."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(path_id,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_workers(workers: int | None, n_tasks: int) -> int:
    """Worker count: explicit argument, else QUENCH_THREADS, else CPU count."""
    if workers is None:
        env = os.environ.get("QUENCH_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(workers, n_tasks))


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class PathRecord:
    """One path's quench outcome and bound values."""

    path_id: int
    seed: int
    quenched: bool
    tau_num: float | None
    quench_components: str | None
    tau_star: float | None
    tau_upper: float | None
    tau_double_star: float | None
    near_cross_t1: float | None
    near_cross_t2: float | None
    aborted: str | None
    ordering_ok: bool | None  # tau_star <= tau_num <= tau_upper (one-step slack)


@dataclass(frozen=True)
class TheoremVerdict:
    """Comparison of one probability bound against the empirical estimate."""

    name: str
    bound_value: float
    empirical_value: float
    satisfied: bool
    vacuous: bool
    note: str = ""


@dataclass
class EnsembleSummary:
    """Aggregated ensemble statistics; horizon-dependent values carry T."""

    config: EnsembleConfig
    records: list[PathRecord]
    n_paths: int
    n_quenched: int
    n_aborted: int
    quench_times: np.ndarray
    horizon: float
    p_hat: float
    p_interval: tuple[float, float]
    ordering_violations: int
    ordering_checked: int
    bound_comparisons: list[TheoremVerdict] = field(default_factory=list)

    @property
    def n_effective(self) -> int:
        return self.n_paths - self.n_aborted

    def empirical_cdf(self, t: float) -> float:
        if self.n_effective == 0:
            return 0.0
        return float(np.searchsorted(self.quench_times, t, side="right")) / self.n_effective


def _build_evaluator(config: SystemConfig) -> PathBoundEvaluator | None:
    if config.bc != BC_ROBIN:
        return None
    pair = solve_robin_eigenpair(config.beta)
    return PathBoundEvaluator(config, pair)


def _run_one(config: SystemConfig, base_seed: int, path_id: int,
             evaluator: PathBoundEvaluator | None) -> PathRecord:
    seed = derive_path_seed(base_seed, path_id)
    traj = simulate(config, seed)
    tau_num = traj.quench_time
    t_star = t_up = t_dd = None
    if evaluator is not None:
        rep = evaluator.evaluate(traj.noise, traj.mixed)
        t_star, t_up, t_dd = rep.tau_star, rep.tau_upper, rep.tau_double_star
    ordering_ok = None
    if tau_num is not None and t_star is not None and t_up is not None:
        slack = config.dt
        ordering_ok = (t_star - slack <= tau_num <= t_up + slack)
    return PathRecord(
        path_id=path_id, seed=seed, quenched=tau_num is not None,
        tau_num=tau_num,
        quench_components=traj.quench.label if traj.quench else None,
        tau_star=t_star, tau_upper=t_up, tau_double_star=t_dd,
        near_cross_t1=traj.near_cross_t1, near_cross_t2=traj.near_cross_t2,
        aborted=traj.aborted, ordering_ok=ordering_ok,
    )


_WORKER_STATE: dict = {}


def _init_worker(payload: bytes) -> None:
    config, base_seed = pickle.loads(payload)
    _WORKER_STATE["config"] = config
    _WORKER_STATE["base_seed"] = base_seed
    _WORKER_STATE["evaluator"] = _build_evaluator(config)


def _worker_run(path_id: int) -> PathRecord:
    return _run_one(_WORKER_STATE["config"], _WORKER_STATE["base_seed"], path_id,
                    _WORKER_STATE["evaluator"])


def run_ensemble(cfg: EnsembleConfig, workers: int | None = None,
                 path_ids=None) -> EnsembleSummary:
    """Simulate the ensemble and aggregate; deterministic for fixed base_seed.

    The reduction is ordered by path index, so the output is independent of
    the worker count and of task scheduling.
    """
    ids = list(range(cfg.n_paths)) if path_ids is None else sorted(path_ids)
    workers = resolve_workers(workers, len(ids))
    if workers <= 1:
        evaluator = _build_evaluator(cfg.base)
        records = [_run_one(cfg.base, cfg.base_seed, i, evaluator) for i in ids]
    else:
        payload = pickle.dumps((cfg.base, cfg.base_seed))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            records = list(pool.map(_worker_run, ids, chunksize=8))
    records.sort(key=lambda r: r.path_id)
    return summarize(cfg, records)


def summarize(cfg: EnsembleConfig, records: list[PathRecord]) -> EnsembleSummary:
    """Aggregate path records; merging partial ensembles reproduces the whole."""
    records = sorted(records, key=lambda r: r.path_id)
    horizon = cfg.horizon
    aborted = [r for r in records if r.aborted is not None]
    quenched = [r for r in records if r.quenched]
    qt = np.sort(np.array([r.tau_num for r in quenched], dtype=float))
    n_eff = len(records) - len(aborted)
    n_by_t = int(np.searchsorted(qt, horizon, side="right"))
    if n_eff > 0:
        p_hat = n_by_t / n_eff
        interval = wilson_interval(n_by_t, n_eff)
    else:
        p_hat = 0.0
        interval = (0.0, 1.0)
    checked = [r for r in quenched if r.ordering_ok is not None]
    violations = sum(1 for r in checked if not r.ordering_ok)
    return EnsembleSummary(
        config=cfg, records=records, n_paths=len(records), n_quenched=len(quenched),
        n_aborted=len(aborted), quench_times=qt, horizon=horizon, p_hat=p_hat,
        p_interval=interval, ordering_violations=violations,
        ordering_checked=len(checked),
    )


def empirical_quench_prob(summary: EnsembleSummary, T: float) -> tuple[float, tuple[float, float]]:
    """Empirical quenching probability by time T with its Wilson 95% interval."""
    if T > summary.horizon + 1e-12:
        raise ValueError(f"T={T} exceeds the ensemble horizon {summary.horizon}")
    n = summary.n_effective
    if n == 0:
        return 0.0, (0.0, 1.0)
    successes = int(np.searchsorted(summary.quench_times, T, side="right"))
    return successes / n, wilson_interval(successes, n)


def check_theorem_consistency(summary: EnsembleSummary, params: BoundParams,
                              T: float | None = None, variant: str | None = None,
                              alpha: float | None = None,
                              sup_ratio: float | None = None) -> list[TheoremVerdict]:
    """Compare each applicable probability bound against the ensemble.

    Upper bounds must dominate the Wilson lower confidence limit of the
    empirical probability at T; the lower bound must stay below the Wilson
    upper limit at the full horizon (reported as a lower proxy for the
    infinite-horizon probability, never silently extrapolated).
    """
    if params.dependence is not summary.config.base.dependence:
        raise ValueError("dependence mode mismatch between ensemble and bound formulas")
    t_check = summary.horizon if T is None else T
    p_hat, (lo, hi) = empirical_quench_prob(summary, t_check)
    verdicts: list[TheoremVerdict] = []

    if params.symmetric:
        ub = quench_prob_upper(t_check, params, variant or "statement")
        verdicts.append(TheoremVerdict(
            name="prob_upper_concentration", bound_value=ub.value,
            empirical_value=lo, satisfied=lo <= ub.value, vacuous=ub.vacuous,
            note=f"p_hat({t_check:g})={p_hat:.4f}",
        ))
        if params.dependence is Dependence.VOLTERRA:
            tb = tail_bound_dependent(t_check, params, variant or "proof")
        else:
            tb = tail_bound_independent(t_check, params)
        verdicts.append(TheoremVerdict(
            name="prob_upper_tail", bound_value=tb.value,
            empirical_value=lo, satisfied=lo <= tb.value, vacuous=tb.vacuous,
            note=f"p_hat({t_check:g})={p_hat:.4f}",
        ))
        if alpha is not None and sup_ratio is not None:
            lb = quench_prob_lower(alpha, params, sup_ratio)
            p_full, (_, hi_full) = empirical_quench_prob(summary, summary.horizon)
            verdicts.append(TheoremVerdict(
                name="prob_lower", bound_value=lb.value, empirical_value=hi_full,
                satisfied=lb.value <= hi_full, vacuous=lb.vacuous,
                note=(f"p_hat({summary.horizon:g})={p_full:.4f} is a lower proxy "
                      "for the infinite-horizon probability"),
            ))
        if (params.hurst > 0.75 and params.dependence is Dependence.INDEPENDENT
                and params.rho1 == params.rho2 and params.rho1 != 0.0):
            probes = [summary.horizon / 4, summary.horizon / 2, summary.horizon]
            values = [summary.empirical_cdf(t) for t in probes]
            trend_ok = all(values[i] <= values[i + 1] + 1e-12 for i in range(2))
            verdicts.append(TheoremVerdict(
                name="almost_sure_trend", bound_value=1.0,
                empirical_value=values[-1], satisfied=trend_ok, vacuous=False,
                note="p_hat at horizons " + ", ".join(
                    f"{t:g}:{v:.4f}" for t, v in zip(probes, values)),
            ))
    return verdicts
