"""Lebesgue-generic sample points as lazy random itineraries.

A point is represented by one branch-symbol stream per axis.  Symbols are
drawn with probability equal to the branch domain length, so the induced
distribution of the point is Lebesgue; the depth-k prefix pins the point
inside a depth-k cylinder whose width shrinks by at least the expansion
factor per symbol.  Orbit positions T^n(x) are read off the same stream
shifted by n, which is what makes exact distance comparisons at n up to
10^6 feasible: no orbit is ever simulated in floating point.

Randomness contract (bit-exact, documented in the README): per-axis streams
are the raw 64-bit outputs of numpy's PCG64 seeded with
``SeedSequence(entropy=seed, spawn_key=(axis,))``; raw output k is mapped
to the symbol s with cum_s <= u/2^64 < cum_{s+1} where cum are the exact
cumulative branch lengths.  Per-point seeds in experiments are derived as
``derive_point_seed(master_seed, point_index)`` (two SplitMix64 rounds).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

from ._rationals import as_fraction, ceil_div, derive_point_seed  # noqa: F401
from .maps import MapSpec, word_interval

ZERO = Fraction(0)
ONE = Fraction(1)

#: Extra symbols a predicate may consume past its initial window before
#: giving up and reporting Unresolved.
REFINE_EXTRA = 256

DEFAULT_DEPTH_LIMIT = 2_000_000


class PrecisionBudgetError(RuntimeError):
    """A query needs more realized symbols than the configured budget."""


class Outcome(enum.Enum):
    HIT = "hit"
    MISS = "miss"
    UNRESOLVED = "unresolved"


def symbol_thresholds(map_spec: MapSpec, axis: int) -> np.ndarray:
    """uint64 cut points for drawing axis symbols from raw 64-bit values.

    Raw value u maps to the symbol s with B_s <= u < B_{s+1} where
    B_s = ceil(cum_s * 2^64); searchsorted(thresholds, u, 'right') is s.
    """
    cuts = []
    cum = ZERO
    for b in map_spec.axes[axis][:-1]:
        cum += b.right - b.left
        cuts.append(ceil_div(cum * (1 << 64)))
    return np.array(cuts, dtype=np.uint64)


class _PrngSource:
    def __init__(self, map_spec: MapSpec, axis: int, seed: int):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(axis,))
        self._bits = np.random.PCG64(ss)
        self._thresholds = symbol_thresholds(map_spec, axis)

    def draw(self, count: int) -> np.ndarray:
        raw = self._bits.random_raw(count).astype(np.uint64)
        return np.searchsorted(self._thresholds, raw, side="right").astype(np.uint32)


class _CycleSource:
    def __init__(self, cycle: Sequence[int]):
        self._cycle = np.asarray(cycle, dtype=np.uint32)
        self._pos = 0

    def draw(self, count: int) -> np.ndarray:
        idx = (self._pos + np.arange(count)) % len(self._cycle)
        self._pos += count
        return self._cycle[idx]


@dataclass(frozen=True)
class Enclosure:
    """Per-axis exact interval around the point at some realized depth."""

    depth: int
    intervals: tuple[tuple[Fraction, Fraction], ...]

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(hi - lo for lo, hi in self.intervals)


class GenericPoint:
    """A lazily realized point; confine each instance to one worker at a time.

    Extension is append-only: realized symbols never change, so any two
    query schedules over the same point observe the same stream.
    """

    def __init__(self, map_spec: MapSpec, sources, seed=None, depth_limit=DEFAULT_DEPTH_LIMIT):
        self.map = map_spec
        self.seed = seed
        self.depth_limit = depth_limit
        self._sources = sources
        self._symbols = [np.empty(0, dtype=np.uint32) for _ in sources]
        self._counts = [0] * len(sources)

    @property
    def realized_depth(self) -> int:
        return max(self._counts) if self._counts else 0

    def symbols(self, axis: int, count: int) -> np.ndarray:
        """First ``count`` symbols of the axis stream, extending lazily."""
        if count > self.depth_limit:
            raise PrecisionBudgetError(
                f"depth {count} exceeds the precision budget {self.depth_limit}"
            )
        have = self._counts[axis]
        if count > have:
            grow = max(count - have, 64, have // 2)
            grow = min(grow, self.depth_limit - have)
            fresh = self._sources[axis].draw(grow)
            self._symbols[axis] = np.concatenate([self._symbols[axis][:have], fresh])
            self._counts[axis] = have + len(fresh)
        return self._symbols[axis][:count]

    def word(self, axis: int, start: int, stop: int) -> tuple[int, ...]:
        return tuple(int(s) for s in self.symbols(axis, stop)[start:stop])


def sample_point(
    map_spec: MapSpec, seed: int, depth_limit: int = DEFAULT_DEPTH_LIMIT
) -> GenericPoint:
    """A Lebesgue-distributed point determined entirely by (map, seed)."""
    sources = [
        _PrngSource(map_spec, axis, seed) for axis in range(map_spec.dimension)
    ]
    return GenericPoint(map_spec, sources, seed=seed, depth_limit=depth_limit)


def forced_point(
    map_spec: MapSpec,
    cycles: Sequence[Sequence[int]],
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
) -> GenericPoint:
    """Test constructor: per-axis periodic symbol streams."""
    if len(cycles) != map_spec.dimension:
        raise ValueError("need one symbol cycle per axis")
    for axis, cyc in enumerate(cycles):
        limit = len(map_spec.axes[axis])
        if any(not 0 <= s < limit for s in cyc):
            raise ValueError(f"axis {axis}: symbol out of range")
    sources = [_CycleSource(c) for c in cycles]
    return GenericPoint(map_spec, sources, seed=None, depth_limit=depth_limit)


def enclose(point: GenericPoint, depth: int) -> Enclosure:
    """The depth-k cylinder rectangle containing the point (monotone in k)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        ivs = tuple((ZERO, ONE) for _ in range(point.map.dimension))
        return Enclosure(depth=0, intervals=ivs)
    ivs = []
    for axis in range(point.map.dimension):
        word = point.word(axis, 0, depth)
        lo, hi, _, _ = word_interval(point.map.axes[axis], word)
        ivs.append((lo, hi))
    return Enclosure(depth=depth, intervals=tuple(ivs))


def _axis_enclosure(point: GenericPoint, axis: int, start: int, depth: int):
    """Exact interval around T^start(x)_axis from ``depth`` symbols."""
    word = point.word(axis, start, start + depth)
    lo, hi, _, _ = word_interval(point.map.axes[axis], word)
    return lo, hi


def _axis_enclosure_ints(
    point: GenericPoint, axis: int, start: int, depth: int, tables
) -> tuple[int, int, int]:
    """(lo_num, hi_num, B): the enclosure as integers over denominator B.

    Only for axes with uniform integer |slope| and integer offsets (the
    caller checks); exact at any depth since Python ints are unbounded.
    """
    slopes, offsets = tables
    K, z = 1, 0
    for s in point.symbols(axis, start + depth)[start : start + depth].tolist():
        K = slopes[s] * K
        z = slopes[s] * z + offsets[s]
    if K > 0:
        return z, z + 1, K
    return -(z + 1), -z, -K


def _ceil_log_expansion(lam: Fraction, value: Fraction) -> int:
    """Smallest k >= 0 with lam^k >= value (exact; lam > 1)."""
    k = 0
    power = Fraction(1)
    while power < value:
        power *= lam
        k += 1
    return k


def _approx_log_expansion(lam: Fraction, value: Fraction) -> int:
    """Fast ~ceil(log_lam(value)); off-by-one is harmless (it only shifts
    the refinement start depth, never the exactness of a comparison)."""
    import math

    if value <= 1:
        return 0
    log_v = math.log(value.numerator) - math.log(value.denominator)
    log_l = math.log(lam.numerator) - math.log(lam.denominator)
    return max(0, math.ceil(log_v / log_l))


def _axis_lambda(map_spec: MapSpec, axis: int) -> Fraction:
    return map_spec.axis_expansion(axis)


def _refine_schedule(base: int) -> list[int]:
    return [base + 8, base + 24, base + 56, base + 120, base + REFINE_EXTRA]


def axis_distance_outcome(
    point: GenericPoint,
    axis: int,
    n: int,
    psi: Fraction,
    metric: str = "interval",
    center: Fraction | None = None,
) -> Outcome:
    """Decide dist(T^n(x)_axis, ref) < psi for ref = x_axis or a fixed center.

    Works on shrinking exact interval enclosures of T^n(x) (the shifted
    stream) and of the reference, refined until the strict comparison is
    decisive or the refinement budget is exhausted.
    """
    if psi <= 0:
        return Outcome.MISS
    lam = _axis_lambda(point.map, axis)
    start_depth = _approx_log_expansion(lam, Fraction(psi.denominator, psi.numerator))
    p, q = psi.numerator, psi.denominator
    tables = point.map.axis_int_tables(axis)
    for depth in _refine_schedule(start_depth):
        try:
            if tables is not None:
                y_lo, y_hi, B = _axis_enclosure_ints(point, axis, n, depth, tables)
                if center is None:
                    x_lo, x_hi, _ = _axis_enclosure_ints(point, axis, 0, depth, tables)
                    den = B
                else:
                    den = B * center.denominator
                    y_lo, y_hi = y_lo * center.denominator, y_hi * center.denominator
                    x_lo = x_hi = center.numerator * B
                hi = max(y_hi - x_lo, x_hi - y_lo)
                lo = max(0, y_lo - x_hi, x_lo - y_hi)
                if metric == "torus":
                    hi, lo = min(hi, den - lo), min(lo, den - hi)
                if hi * q < p * den:
                    return Outcome.HIT
                if lo * q >= p * den:
                    return Outcome.MISS
                continue
            y_lo, y_hi = _axis_enclosure(point, axis, n, depth)
            if center is None:
                x_lo, x_hi = _axis_enclosure(point, axis, 0, depth)
            else:
                x_lo = x_hi = center
        except PrecisionBudgetError:
            logger.warning(
                "precision budget hit deciding axis %d at n=%d (depth %d); "
                "reporting Unresolved",
                axis,
                n,
                depth,
            )
            return Outcome.UNRESOLVED
        hi = max(y_hi - x_lo, x_hi - y_lo)
        lo = max(ZERO, y_lo - x_hi, x_lo - y_hi)
        if metric == "torus":
            hi, lo = min(hi, 1 - lo), min(lo, 1 - hi)
        if hi < psi:
            return Outcome.HIT
        if lo >= psi:
            return Outcome.MISS
    return Outcome.UNRESOLVED


def distance_predicate(
    map_spec: MapSpec,
    point: GenericPoint,
    n: int,
    radii: Sequence,
    metric: str = "interval",
    center: Sequence | None = None,
) -> Outcome:
    """Hit iff dist(T^n(x)_i, ref_i) < psi_i on every axis (strict).

    ``center=None`` gives the recurrence predicate (reference is the point
    itself); otherwise the shrinking-target predicate around the center.
    Unresolved is returned only when an axis comparison stays undecided at
    the refinement cap; callers count it as a miss and tally it.
    """
    if point.map is not map_spec and point.map != map_spec:
        raise ValueError("point was sampled from a different map")
    if n < 1:
        raise ValueError("n must be >= 1")
    rad = [as_fraction(r) for r in radii]
    cen = [as_fraction(c) for c in center] if center is not None else None
    unresolved = False
    for axis in range(map_spec.dimension):
        out = axis_distance_outcome(
            point,
            axis,
            n,
            rad[axis],
            metric=metric,
            center=None if cen is None else cen[axis],
        )
        if out is Outcome.MISS:
            return Outcome.MISS
        if out is Outcome.UNRESOLVED:
            unresolved = True
    return Outcome.UNRESOLVED if unresolved else Outcome.HIT
