"""Counting functions R(x,N) and W(x,N) with checkpointing.

Two engines produce identical results:

* digit engine -- on axes where every branch has the same positive integer
  slope b, the axis stream is a base-b digit expansion and the n-fold map
  is an n-digit shift.  Distances are compared through W-digit integer
  windows (W ~ log_b(1/psi) plus guard digits), vectorized over all n <= N
  at once; only the handful of n whose window straddles the decision
  boundary fall back to exact interval refinement.
* interval engine -- everything else: exact rational interval enclosures
  per n, as in ``points.distance_predicate``.

Unresolved comparisons (possible only when the true distance equals the
radius, a measure-zero event) count as misses and are tallied per record.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._rationals import as_fraction, floor_div, format_fraction, iroot
from .maps import MapSpec
from .points import GenericPoint, Outcome, axis_distance_outcome
from .rates import AxisRate, RateFunction, psi_partial_sums

#: Guard bits appended to every digit window; the chance that a single
#: comparison needs refinement is ~2^-(guard) per time step.
GUARD_BITS = 16

_INT64_WINDOW_LIMIT = 1 << 62


@dataclass(frozen=True)
class TargetSpec:
    """Fixed center of the shrinking balls."""

    center: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(as_fraction(x) for x in self.center)
        object.__setattr__(self, "center", c)
        if any(not 0 <= x <= 1 for x in c):
            raise ValueError("target center must lie in [0,1]^d")


@dataclass(frozen=True)
class CountRecord:
    """Hit counts of one point at increasing checkpoints."""

    seed: int | None
    kind: str
    checkpoints: tuple[int, ...]
    counts: tuple[int, ...]
    main_terms: tuple[Fraction, ...] | None
    unresolved: tuple[int, ...]
    hits: np.ndarray | None = None

    def csv_rows(self) -> list[list]:
        rows = []
        for i, N in enumerate(self.checkpoints):
            if self.main_terms is None:
                exact, approx = "", ""
            else:
                exact = format_fraction(self.main_terms[i])
                approx = repr(float(self.main_terms[i]))
            rows.append([self.seed, N, self.counts[i], exact, approx, self.unresolved[i]])
        return rows


CSV_HEADER = ["seed", "N", "R", "Psi_exact", "Psi_float", "unresolved"]


def write_records_csv(records: Sequence[CountRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerows(rec.csv_rows())


def geometric_checkpoints(n_max: int, minimum: int = 1) -> list[int]:
    """ceil(10^(j/4)) for j = 0,1,..., deduplicated, clipped to [minimum, n_max]."""
    out = []
    j = 0
    while True:
        power = 10**j
        root = iroot(power, 4)
        value = root if root**4 == power else root + 1
        if value > n_max:
            break
        if value >= minimum and (not out or value != out[-1]):
            out.append(value)
        j += 1
    if not out or out[-1] != n_max:
        out.append(n_max)
    out = [v for v in out if v >= minimum]
    if not out:
        raise ValueError(f"no checkpoints in [{minimum}, {n_max}]")
    return out


# ---------------------------------------------------------------------------
# Digit engine
# ---------------------------------------------------------------------------


def _digit_axes(map_spec: MapSpec) -> list[int] | None:
    bases = [map_spec.axis_uniform_base(a) for a in range(map_spec.dimension)]
    return None if any(b is None for b in bases) else bases


@lru_cache(maxsize=64)
def _axis_thresholds(axis_rate: AxisRate, n_max: int, scale: int) -> tuple:
    """Per-n integer cut points for window comparisons at denominator ``scale``.

    For t_n = psi(n) * scale: a window distance D is a certain hit when
    D <= floor(t_n) - 1, a certain miss when D >= ceil(t_n) + 1 (or always
    when psi(n) = 0); anything between needs refinement.
    """
    hit = np.empty(n_max, dtype=np.int64)
    miss = np.empty(n_max, dtype=np.int64)
    D = axis_rate.fixed_denominator()
    for n in range(1, n_max + 1):
        if D is not None:
            t_num, t_den = axis_rate.scaled_value(n, D) * scale, D
        else:
            v = axis_rate(n)
            t_num, t_den = v.numerator * scale, v.denominator
        if t_num == 0:
            hit[n - 1] = -1
            miss[n - 1] = 0
            continue
        fl = t_num // t_den
        ce = -((-t_num) // t_den)
        hit[n - 1] = min(fl - 1, _INT64_WINDOW_LIMIT)
        miss[n - 1] = min(ce + 1, _INT64_WINDOW_LIMIT)
    return hit, miss


def _axis_window_digits(axis_rate: AxisRate, n_max: int, base: int) -> int | None:
    """Window length W with base^W >= 2^GUARD_BITS / min positive psi."""
    if axis_rate.nonincreasing():
        candidates = [axis_rate(n_max), axis_rate(1)]
    else:
        candidates = [axis_rate(n) for n in range(1, n_max + 1)]
    positive = [v for v in candidates if v > 0]
    if not positive:
        return None
    need = Fraction(1 << GUARD_BITS) / min(positive)
    W = 1
    power = Fraction(base)
    while power < need:
        power *= base
        W += 1
    return W


def _axis_digit_flags(
    point: GenericPoint,
    axis: int,
    base: int,
    n_max: int,
    axis_rate: AxisRate,
    center: Fraction | None,
    metric: str,
) -> tuple[np.ndarray, np.ndarray] | None:
    """(certain_hit, certain_miss) boolean arrays over n = 1..n_max, or None
    when the axis radius is identically zero (then every n is a miss)."""
    W = _axis_window_digits(axis_rate, n_max, base)
    if W is None:
        return None
    B = base**W
    if B >= _INT64_WINDOW_LIMIT:
        raise _DigitOverflow
    digits = point.symbols(axis, n_max + W).astype(np.int64)
    v = np.zeros(n_max + 1, dtype=np.int64)
    for j in range(W):
        np.multiply(v, base, out=v)
        np.add(v, digits[j : j + n_max + 1], out=v)
    if center is None:
        ref = int(v[0])
    else:
        ref = floor_div(center * B)
    D = np.abs(v[1:] - ref)
    hit_cut, miss_cut = _axis_thresholds(axis_rate, n_max, B)
    hit = D <= hit_cut
    miss = D >= miss_cut
    if metric == "torus":
        D2 = B - D
        hit |= D2 <= hit_cut
        miss &= D2 >= miss_cut
    return hit, ~hit & miss


class _DigitOverflow(Exception):
    pass


def _count_with_digits(
    map_spec: MapSpec,
    rate: RateFunction,
    point: GenericPoint,
    bases: list[int],
    n_max: int,
    center: tuple[Fraction, ...] | None,
    metric: str,
) -> tuple[np.ndarray, np.ndarray]:
    """(hits, unresolved) boolean arrays over n = 1..n_max for one point."""
    all_hit = np.ones(n_max, dtype=bool)
    any_miss = np.zeros(n_max, dtype=bool)
    per_axis_unknown = np.zeros(n_max, dtype=bool)
    for axis in range(map_spec.dimension):
        flags = _axis_digit_flags(
            point,
            axis,
            bases[axis],
            n_max,
            rate.axes[axis],
            None if center is None else center[axis],
            metric,
        )
        if flags is None:
            return np.zeros(n_max, dtype=bool), np.zeros(n_max, dtype=bool)
        hit, miss = flags
        all_hit &= hit
        any_miss |= miss
        per_axis_unknown |= ~hit & ~miss
    undecided = ~all_hit & ~any_miss & per_axis_unknown
    unresolved = np.zeros(n_max, dtype=bool)
    for n_idx in np.nonzero(undecided)[0]:
        n = int(n_idx) + 1
        outcome = _exact_outcome(map_spec, rate, point, n, center, metric)
        if outcome is Outcome.HIT:
            all_hit[n_idx] = True
        elif outcome is Outcome.UNRESOLVED:
            unresolved[n_idx] = True
    return all_hit, unresolved


def _exact_outcome(map_spec, rate, point, n, center, metric) -> Outcome:
    unresolved = False
    for axis in range(map_spec.dimension):
        out = axis_distance_outcome(
            point,
            axis,
            n,
            rate.axes[axis](n),
            metric=metric,
            center=None if center is None else center[axis],
        )
        if out is Outcome.MISS:
            return Outcome.MISS
        if out is Outcome.UNRESOLVED:
            unresolved = True
    return Outcome.UNRESOLVED if unresolved else Outcome.HIT


# ---------------------------------------------------------------------------
# Interval engine
# ---------------------------------------------------------------------------


def _count_with_intervals(
    map_spec: MapSpec,
    rate: RateFunction,
    point: GenericPoint,
    n_max: int,
    center: tuple[Fraction, ...] | None,
    metric: str,
) -> tuple[np.ndarray, np.ndarray]:
    hits = np.zeros(n_max, dtype=bool)
    unresolved = np.zeros(n_max, dtype=bool)
    for n in range(1, n_max + 1):
        out = _exact_outcome(map_spec, rate, point, n, center, metric)
        if out is Outcome.HIT:
            hits[n - 1] = True
        elif out is Outcome.UNRESOLVED:
            unresolved[n - 1] = True
    return hits, unresolved


# ---------------------------------------------------------------------------
# Public counting operations
# ---------------------------------------------------------------------------


def hit_indicators(
    map_spec: MapSpec,
    rate: RateFunction,
    point: GenericPoint,
    n_max: int,
    target: TargetSpec | None = None,
    metric: str = "interval",
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (hits, unresolved) over n = 1..n_max; engine chosen per map."""
    if rate.dimension != map_spec.dimension:
        raise ValueError("rate and map dimensions differ")
    limit = rate.max_index()
    if limit is not None and n_max > limit:
        raise ValueError(f"rate is only defined up to n = {limit}")
    center = target.center if target is not None else None
    bases = _digit_axes(map_spec)
    if bases is not None:
        try:
            return _count_with_digits(
                map_spec, rate, point, bases, n_max, center, metric
            )
        except _DigitOverflow:
            pass
    return _count_with_intervals(map_spec, rate, point, n_max, center, metric)


def _make_record(
    kind: str,
    point: GenericPoint,
    checkpoints: Sequence[int],
    hits: np.ndarray,
    unresolved: np.ndarray,
    main_terms: Sequence[Fraction] | None,
    keep_hits: int,
) -> CountRecord:
    ckpts = list(checkpoints)
    if ckpts != sorted(ckpts) or len(set(ckpts)) != len(ckpts) or ckpts[0] < 1:
        raise ValueError("checkpoints must be strictly increasing positive integers")
    cum_hits = np.cumsum(hits)
    cum_unres = np.cumsum(unresolved)
    idx = [N - 1 for N in ckpts]
    return CountRecord(
        seed=point.seed,
        kind=kind,
        checkpoints=tuple(ckpts),
        counts=tuple(int(cum_hits[i]) for i in idx),
        main_terms=None if main_terms is None else tuple(main_terms),
        unresolved=tuple(int(cum_unres[i]) for i in idx),
        hits=hits[:keep_hits].copy() if keep_hits else None,
    )


def count_recurrence(
    map_spec: MapSpec,
    rate: RateFunction,
    point: GenericPoint,
    checkpoints: Sequence[int],
    metric: str = "interval",
    main_terms: Sequence[Fraction] | None = None,
    with_main_terms: bool = True,
    keep_hits: int = 0,
) -> CountRecord:
    """R(x, N_j) = #{n <= N_j : dist(x_i, T^n(x)_i) < psi_i(n) on all axes}."""
    n_max = max(checkpoints)
    hits, unresolved = hit_indicators(map_spec, rate, point, n_max, metric=metric)
    if main_terms is None and with_main_terms:
        main_terms = psi_partial_sums(rate, list(checkpoints))
    return _make_record(
        "recurrence", point, checkpoints, hits, unresolved, main_terms, keep_hits
    )


def count_shrinking_target(
    map_spec: MapSpec,
    rate: RateFunction,
    target: TargetSpec,
    point: GenericPoint,
    checkpoints: Sequence[int],
    metric: str = "interval",
    main_terms: Sequence[Fraction] | None = None,
    with_main_terms: bool = True,
    keep_hits: int = 0,
) -> CountRecord:
    """W(x, N_j) = #{n <= N_j : dist(T^n(x)_i, center_i) < psi_i(n) on all axes}."""
    n_max = max(checkpoints)
    hits, unresolved = hit_indicators(
        map_spec, rate, point, n_max, target=target, metric=metric
    )
    if main_terms is None and with_main_terms:
        from .rates import target_main_term_sums

        main_terms = target_main_term_sums(rate, target.center, list(checkpoints))
    return _make_record(
        "target", point, checkpoints, hits, unresolved, main_terms, keep_hits
    )
