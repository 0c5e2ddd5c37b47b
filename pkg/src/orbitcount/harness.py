"""Monte Carlo experiments over sampled points and the acceptance statistics.

The counting asymptotic under test says that for almost every point the
hit count R(x,N) tracks the main term (Psi for recurrence, the exact ball
measure sum for targets) with error O(sqrt(main) * polylog).  The harness
realizes this as falsifiable desk-scale checks:

* ``run_experiment``     -- S seeded points, per-checkpoint count statistics,
                            relative-error and envelope checks, exponent fit.
* ``variance_statistic`` -- the empirical second moment of the centered
                            partial sums of hit indicators, compared with a
                            linear bound (the quantitative Borel-Cantelli
                            hypothesis).
* ``fit_error_exponent`` -- least squares slope of log median |R - main|
                            against log main, with a bootstrap band.
* ``dichotomy_check``    -- the convergence regime: summable main term
                            forces uniformly bounded final counts.

Determinism contract: everything is a pure function of the configuration
including the master seed; worker threads only parallelize independent
points and results are reassembled by index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._rationals import derive_point_seed, format_fraction
from .counting import (
    CountRecord,
    TargetSpec,
    count_recurrence,
    count_shrinking_target,
    geometric_checkpoints,
)
from .exact_measure import event_recurrence, measure
from .maps import MapSpec
from .points import sample_point
from .rates import RateFunction, psi_partial_sums, psi_sum, target_main_term_sums

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """An experiment plan fails validation."""


@dataclass(frozen=True)
class Thresholds:
    """Acceptance cut-offs; engineering defaults frozen for CI."""

    rel_err: float = 0.05
    envelope_coeff: float = 4.0
    envelope_log_exp: float = 1.6
    envelope_const: float = 50.0
    envelope_frac: float = 0.95
    slope_band_max: float = 0.75
    dichotomy_max_final: int = 20
    dichotomy_sum_bound: Fraction = Fraction(10)


@dataclass(frozen=True)
class ExperimentPlan:
    map: MapSpec
    rate: RateFunction
    kind: str  # "recurrence" | "target"
    n_max: int
    samples: int
    master_seed: int
    target: TargetSpec | None = None
    checkpoints: tuple[int, ...] | None = None
    metric: str = "interval"
    threads: int = 0
    keep_hits: int = 0
    thresholds: Thresholds = field(default_factory=Thresholds)

    def resolved_checkpoints(self) -> list[int]:
        if self.checkpoints is not None:
            return list(self.checkpoints)
        return geometric_checkpoints(self.n_max)


def default_threads() -> int:
    env = os.environ.get("ORBITCOUNT_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def validate_plan(plan: ExperimentPlan) -> None:
    if plan.samples < 2:
        raise ConfigError("samples must be >= 2")
    if plan.kind not in ("recurrence", "target"):
        raise ConfigError(f"unknown experiment kind {plan.kind!r}")
    if plan.kind == "target" and plan.target is None:
        raise ConfigError("target experiments need a target center")
    if plan.rate.dimension != plan.map.dimension:
        raise ConfigError("rate and map dimensions differ")
    limit = plan.rate.max_index()
    if limit is not None and plan.n_max > limit:
        raise ConfigError(f"rate table too short for n_max = {plan.n_max}")
    ckpts = plan.resolved_checkpoints()
    if ckpts != sorted(ckpts) or min(ckpts) < 1 or max(ckpts) != plan.n_max:
        raise ConfigError("checkpoints must increase and end at n_max")


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    band_low: float
    band_high: float
    flag: str = ""
    used_checkpoints: int = 0


class InsufficientCheckpointsError(RuntimeError):
    pass


@dataclass(frozen=True)
class CheckpointStats:
    N: int
    sample_size: int
    main_exact: Fraction
    mean_count: float
    var_count: float
    median_absdev: float
    q90_absdev: float
    envelope_fraction: float
    unresolved_total: int


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    checkpoints: tuple[int, ...]
    stats: tuple[CheckpointStats, ...]
    counts: np.ndarray  # (samples, checkpoints) int64
    unresolved: np.ndarray  # (samples, checkpoints) int64, cumulative
    mains: tuple[Fraction, ...]
    seeds: tuple[int, ...]
    fit: ExponentFit | None
    unresolved_total: int
    thresholds: Thresholds
    passed: dict
    hits_matrix: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "sample_size": len(self.seeds),
            "checkpoints": [
                {
                    "N": s.N,
                    "main_exact": format_fraction(s.main_exact),
                    "main_float": float(s.main_exact),
                    "mean_count": s.mean_count,
                    "var_count": s.var_count,
                    "median_absdev": s.median_absdev,
                    "q90_absdev": s.q90_absdev,
                    "envelope_fraction": s.envelope_fraction,
                    "unresolved_total": s.unresolved_total,
                }
                for s in self.stats
            ],
            "exponent_fit": None
            if self.fit is None
            else {
                "slope": self.fit.slope,
                "intercept": self.fit.intercept,
                "band_low": self.fit.band_low,
                "band_high": self.fit.band_high,
                "flag": self.fit.flag,
                "used_checkpoints": self.fit.used_checkpoints,
            },
            "unresolved_total": self.unresolved_total,
            "passed": self.passed,
            "per_point_counts": self.counts.tolist(),
        }


def _run_points(
    plan: ExperimentPlan, worker: Callable[[int], CountRecord]
) -> list[CountRecord]:
    threads = plan.threads or default_threads()
    indices = range(plan.samples)
    if threads <= 1:
        return [worker(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, indices))


def envelope_bound(main: float, thresholds: Thresholds) -> float:
    """The tolerated deviation at main-term value ``main``."""
    if main <= 1.0:
        return thresholds.envelope_const
    return (
        thresholds.envelope_coeff
        * main**0.5
        * np.log(main) ** thresholds.envelope_log_exp
        + thresholds.envelope_const
    )


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    """Sample S points, count hits, and aggregate checkpoint statistics."""
    validate_plan(plan)
    ckpts = plan.resolved_checkpoints()
    if plan.kind == "recurrence":
        mains = psi_partial_sums(plan.rate, ckpts)
    else:
        mains = target_main_term_sums(plan.rate, plan.target.center, ckpts)
    seeds = tuple(derive_point_seed(plan.master_seed, i) for i in range(plan.samples))

    def worker(i: int) -> CountRecord:
        point = sample_point(plan.map, seeds[i])
        if plan.kind == "recurrence":
            return count_recurrence(
                plan.map,
                plan.rate,
                point,
                ckpts,
                metric=plan.metric,
                main_terms=mains,
                keep_hits=plan.keep_hits,
            )
        return count_shrinking_target(
            plan.map,
            plan.rate,
            plan.target,
            point,
            ckpts,
            metric=plan.metric,
            main_terms=mains,
            keep_hits=plan.keep_hits,
        )

    records = _run_points(plan, worker)
    counts = np.array([r.counts for r in records], dtype=np.int64)
    unres = np.array([r.unresolved for r in records], dtype=np.int64)
    mains_f = np.array([float(m) for m in mains])
    absdev = np.abs(counts - mains_f)

    stats = []
    for j, N in enumerate(ckpts):
        bound = envelope_bound(mains_f[j], plan.thresholds)
        stats.append(
            CheckpointStats(
                N=N,
                sample_size=plan.samples,
                main_exact=mains[j],
                mean_count=float(counts[:, j].mean()),
                var_count=float(counts[:, j].var(ddof=1)),
                median_absdev=float(np.median(absdev[:, j])),
                q90_absdev=float(np.quantile(absdev[:, j], 0.9)),
                envelope_fraction=float((absdev[:, j] <= bound).mean()),
                unresolved_total=int(unres[:, j].sum()),
            )
        )

    fit: ExponentFit | None
    try:
        fit = fit_error_exponent(mains, counts, rng_seed=plan.master_seed)
    except InsufficientCheckpointsError:
        fit = None

    bounds = np.array([envelope_bound(m, plan.thresholds) for m in mains_f])
    envelope_ok = float((absdev <= bounds[None, :]).mean())
    final_rel = (
        float(np.median(absdev[:, -1])) / float(mains_f[-1]) if mains_f[-1] > 0 else 0.0
    )
    passed = {
        "final_relative_error": final_rel,
        "final_relative_error_ok": final_rel <= plan.thresholds.rel_err,
        "envelope_fraction": envelope_ok,
        "envelope_ok": envelope_ok >= plan.thresholds.envelope_frac,
        "slope_band_high": None if fit is None else fit.band_high,
        "slope_ok": True
        if fit is None or fit.flag == "zero-residual"
        else fit.band_high <= plan.thresholds.slope_band_max,
    }
    passed["all"] = bool(
        passed["final_relative_error_ok"] and passed["envelope_ok"] and passed["slope_ok"]
    )

    hits_matrix = None
    if plan.keep_hits:
        hits_matrix = np.stack([r.hits for r in records])

    return ExperimentReport(
        kind=plan.kind,
        checkpoints=tuple(ckpts),
        stats=tuple(stats),
        counts=counts,
        unresolved=unres,
        mains=tuple(mains),
        seeds=seeds,
        fit=fit,
        unresolved_total=int(unres[:, -1].sum()),
        thresholds=plan.thresholds,
        passed=passed,
        hits_matrix=hits_matrix,
    )


# ---------------------------------------------------------------------------
# Exponent fit
# ---------------------------------------------------------------------------


def fit_error_exponent(
    mains: Sequence[Fraction | float],
    counts: np.ndarray,
    rng_seed: int = 0,
    bootstrap: int = 200,
    min_checkpoints: int = 8,
    min_main: float = 10.0,
) -> ExponentFit:
    """Least-squares slope of log(median |count - main|) against log(main).

    The median is taken across sampled points at each checkpoint; the band
    is a bootstrap 95% interval over resampled points.  Checkpoints with
    main < ``min_main`` are ignored; checkpoints whose median residual is
    zero are dropped (all-zero residuals return the "zero-residual" flag).
    """
    mains_f = np.array([float(m) for m in mains])
    counts = np.asarray(counts, dtype=np.float64)
    absdev = np.abs(counts - mains_f[None, :])
    medians = np.median(absdev, axis=0)
    eligible = mains_f >= min_main
    if medians[eligible].size and np.all(medians[eligible] == 0):
        return ExponentFit(0.0, 0.0, 0.0, 0.0, flag="zero-residual")
    usable = eligible & (medians > 0)
    if int(usable.sum()) < min_checkpoints:
        raise InsufficientCheckpointsError(
            f"need {min_checkpoints} checkpoints with main >= {min_main} "
            f"and positive residual, have {int(usable.sum())}"
        )
    log_x = np.log(mains_f[usable])

    def slope_of(matrix: np.ndarray) -> tuple[float, float]:
        med = np.median(np.abs(matrix - mains_f[None, :]), axis=0)[usable]
        med = np.maximum(med, 1e-12)
        coef = np.polyfit(log_x, np.log(med), 1)
        return float(coef[0]), float(coef[1])

    slope, intercept = slope_of(counts)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed, spawn_key=(0xF17,))))
    slopes = np.empty(bootstrap)
    S = counts.shape[0]
    for b in range(bootstrap):
        rows = rng.integers(0, S, size=S)
        slopes[b], _ = slope_of(counts[rows])
    return ExponentFit(
        slope=slope,
        intercept=intercept,
        band_low=float(np.quantile(slopes, 0.025)),
        band_high=float(np.quantile(slopes, 0.975)),
        used_checkpoints=int(usable.sum()),
    )


# ---------------------------------------------------------------------------
# Variance statistic (quantitative Borel-Cantelli hypothesis)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QbcInstance:
    """Centering sequence c_n (= phi_n) for the variance condition.

    c_n is the exact event measure while the cylinder count stays under the
    cap and the 2^d * prod psi_i(n) proxy beyond; ``proxy_from`` marks the
    first proxied index (None when everything is exact).
    """

    kind: str
    c: tuple[Fraction, ...]
    proxy_from: int | None

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])


def qbc_instance(
    map_spec: MapSpec,
    rate: RateFunction,
    n_max: int,
    oracle_cap: int = 1 << 20,
) -> QbcInstance:
    c: list[Fraction] = []
    proxy_from = None
    for n in range(1, n_max + 1):
        if map_spec.cylinder_count(n) <= oracle_cap:
            c.append(measure(event_recurrence(map_spec, rate, n, cap=oracle_cap)))
        else:
            if proxy_from is None:
                proxy_from = n
            c.append((1 << map_spec.dimension) * rate.product(n))
    return QbcInstance(kind="recurrence", c=tuple(c), proxy_from=proxy_from)


def variance_statistic(
    hits_matrix: np.ndarray,
    c_values: Sequence[Fraction | float],
    a: int,
    b: int,
) -> dict:
    """Mean over points of (sum_{n=a..b} (f_n - c_n))^2 plus the linear bound.

    ``hits_matrix`` holds per-point indicators f_n for n = 1..n_keep
    (columns), as produced by counting with ``keep_hits``.
    """
    if not 1 <= a <= b <= hits_matrix.shape[1]:
        raise ValueError("need 1 <= a <= b <= retained indicator range")
    c = np.array([float(v) for v in c_values])[a - 1 : b]
    block = hits_matrix[:, a - 1 : b].astype(np.float64)
    sums = (block - c[None, :]).sum(axis=1)
    statistic = float((sums**2).mean())
    phi_total = float(np.sum(c))
    return {
        "statistic": statistic,
        "phi_sum": phi_total,
        "ratio": statistic / phi_total if phi_total > 0 else 0.0,
        "sample_size": hits_matrix.shape[0],
        "per_point_sums": sums,
    }


# ---------------------------------------------------------------------------
# Dichotomy (convergence regime)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DichotomyReport:
    kind: str
    sample_size: int
    n_max: int
    main_sum: Fraction
    final_counts: tuple[int, ...]
    last_hits: tuple[int, ...]
    max_final: int
    bound: int
    passed: bool
    unresolved_total: int

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "sample_size": self.sample_size,
            "n_max": self.n_max,
            "main_sum_exact": format_fraction(self.main_sum),
            "main_sum_float": float(self.main_sum),
            "final_counts": list(self.final_counts),
            "last_hits": list(self.last_hits),
            "max_final": self.max_final,
            "bound": self.bound,
            "passed": self.passed,
            "unresolved_total": self.unresolved_total,
        }


def dichotomy_check(plan: ExperimentPlan) -> DichotomyReport:
    """Convergent main term: every sampled point must stop hitting early.

    Precondition: the full main-term sum up to n_max stays below the
    configured bound (otherwise the rate is not in the convergence regime
    and the check is meaningless).
    """
    validate_plan(plan)
    total = psi_sum(plan.rate, plan.n_max)
    if total > plan.thresholds.dichotomy_sum_bound:
        raise ConfigError(
            f"main-term sum {float(total):.3f} exceeds the convergence bound "
            f"{float(plan.thresholds.dichotomy_sum_bound):.3f}; "
            "dichotomy_check needs a summable rate"
        )
    from .counting import hit_indicators

    seeds = tuple(derive_point_seed(plan.master_seed, i) for i in range(plan.samples))

    def worker(i: int) -> tuple[int, int, int]:
        point = sample_point(plan.map, seeds[i])
        target = plan.target if plan.kind == "target" else None
        hits, unresolved = hit_indicators(
            plan.map, plan.rate, point, plan.n_max, target=target, metric=plan.metric
        )
        nz = np.nonzero(hits)[0]
        last = int(nz[-1]) + 1 if nz.size else 0
        return int(hits.sum()), last, int(unresolved.sum())

    results = _run_points(plan, worker)
    finals = tuple(r[0] for r in results)
    lasts = tuple(r[1] for r in results)
    bound = plan.thresholds.dichotomy_max_final
    return DichotomyReport(
        kind=plan.kind,
        sample_size=plan.samples,
        n_max=plan.n_max,
        main_sum=total,
        final_counts=finals,
        last_hits=lasts,
        max_final=max(finals),
        bound=bound,
        passed=max(finals) <= bound,
        unresolved_total=sum(r[2] for r in results),
    )
