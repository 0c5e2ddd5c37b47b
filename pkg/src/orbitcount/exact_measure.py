"""Exact rational measures of recurrence / target events by cylinder decomposition.

Within a depth-n cylinder the n-fold map acts as x -> K_i x_i - z_i per
axis, so the recurrence event {dist(x_i, T^n(x)_i) < psi_i(n) for all i}
meets the cylinder in a coordinate-parallel rectangle: per axis the open
interval solving |(K_i - 1) x_i - z_i| < psi_i(n), clipped to the cylinder.
Pullbacks of rectangles meet cylinders in affine-preimage rectangles.
Summing exact rectangle volumes over all cylinders gives ground-truth
measures for mu(A_n), mu(E_n), mu(A_m [intersect] A_n), Phi(N) and mixing
deficits, with no rounding anywhere.

Events over product maps factorize per axis, so measures are computed as
products of per-axis interval-length sums; the cylinder count cap still
applies to the product.  Axes on which every branch has the same integer
absolute slope and integer offsets (doubling, base-b, tent, toral factors)
use a vectorized integer lane; everything else walks the branch tree with
Fractions.  Both lanes compute the same exact values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from ._rationals import RationalLike, as_fraction
from .maps import (
    DEFAULT_CYLINDER_CAP,
    Branch1D,
    Cylinder,
    DepthCapError,
    MapSpec,
)
from .rates import RateFunction

ZERO = Fraction(0)
ONE = Fraction(1)

Interval = tuple[Fraction, Fraction]
Rect = tuple[Interval, ...]

#: Switch to the vectorized lane only while scaled integers fit in int64.
_INT64_GUARD = 1 << 62
_BFS_CHUNK = 1 << 16


class _LaneOverflow(Exception):
    """Scaled integers would not fit in int64; fall back to the generic lane."""


# ---------------------------------------------------------------------------
# Event sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventSet:
    """A depth-n event described cylinder-by-cylinder.

    kind "recurrence": the orbit returns psi-close to the start at time n.
    kind "target":     the orbit enters the clipped ball around ``center``.
    kind "pullback":   preimage T^{-n} of an explicit union of rectangles.
    """

    map: MapSpec
    depth: int
    kind: str
    radii: tuple[Fraction, ...] | None = None
    center: tuple[Fraction, ...] | None = None
    rects: tuple[Rect, ...] | None = None
    cap: int = DEFAULT_CYLINDER_CAP

    def pieces(self) -> Iterator[tuple[Cylinder, Rect | None]]:
        """Yield (cylinder, rectangle) for every depth-n cylinder, lex order."""
        from .maps import cylinders

        for cyl in cylinders(self.map, self.depth, cap=self.cap):
            rect = self._rect_in(cyl)
            yield cyl, rect

    def _rect_in(self, cyl: Cylinder) -> Rect | None:
        if self.kind == "pullback":
            # union of preimages; only meaningful piece-by-piece
            raise ValueError("pullback events have one rectangle per (cylinder, rect)")
        out = []
        for axis in range(self.map.dimension):
            win = self._axis_window(axis)(
                cyl.slopes[axis], cyl.offsets[axis], cyl.lows[axis], cyl.highs[axis]
            )
            if win is None:
                return None
            out.append(win)
        return tuple(out)

    def _axis_window(self, axis: int) -> Callable:
        if self.kind == "recurrence":
            return _recurrence_window(self.radii[axis])
        if self.kind == "target":
            lo = max(ZERO, self.center[axis] - self.radii[axis])
            hi = min(ONE, self.center[axis] + self.radii[axis])
            return _preimage_window(lo, hi)
        raise ValueError(f"no single-axis window for kind {self.kind!r}")


def _check_cap(map_spec: MapSpec, depth: int, cap: int) -> None:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    count = map_spec.cylinder_count(depth)
    if count > cap:
        raise DepthCapError(f"event at depth {depth} has {count} cylinders > cap {cap}")


def event_recurrence(
    map_spec: MapSpec, rate: RateFunction, n: int, cap: int = DEFAULT_CYLINDER_CAP
) -> EventSet:
    """The time-n recurrence event A_n = {x : dist(x_i, T^n(x)_i) < psi_i(n)}."""
    _check_cap(map_spec, n, cap)
    if rate.dimension != map_spec.dimension:
        raise ValueError("rate and map dimensions differ")
    return EventSet(map=map_spec, depth=n, kind="recurrence", radii=rate.radii(n), cap=cap)


def event_target(
    map_spec: MapSpec,
    rate: RateFunction,
    target,
    n: int,
    cap: int = DEFAULT_CYLINDER_CAP,
) -> EventSet:
    """The time-n target event E_n = T^{-n} B(center, psi(n)), balls clipped to the cube."""
    _check_cap(map_spec, n, cap)
    center = tuple(as_fraction(c) for c in getattr(target, "center", target))
    if len(center) != map_spec.dimension:
        raise ValueError("target center dimension does not match the map")
    return EventSet(
        map=map_spec, depth=n, kind="target", radii=rate.radii(n), center=center, cap=cap
    )


def event_pullback(
    map_spec: MapSpec,
    rects: Sequence[Sequence[Sequence[RationalLike]]],
    n: int,
    cap: int = DEFAULT_CYLINDER_CAP,
) -> EventSet:
    """T^{-n} of a union of pairwise-disjoint coordinate rectangles."""
    _check_cap(map_spec, n, cap)
    normalized = tuple(_normalize_rect(map_spec.dimension, r) for r in rects)
    return EventSet(map=map_spec, depth=n, kind="pullback", rects=normalized, cap=cap)


def _normalize_rect(dimension: int, rect) -> Rect:
    out = []
    for axis_iv in rect:
        lo, hi = as_fraction(axis_iv[0]), as_fraction(axis_iv[1])
        if not (ZERO <= lo <= hi <= ONE):
            raise ValueError(f"rectangle side [{lo},{hi}] not inside [0,1]")
        out.append((lo, hi))
    if len(out) != dimension:
        raise ValueError("rectangle dimension does not match the map")
    return tuple(out)


def rect_volume(rect: Rect) -> Fraction:
    v = Fraction(1)
    for lo, hi in rect:
        v *= hi - lo
    return v


# ---------------------------------------------------------------------------
# Per-axis window solvers (exact Fractions)
# ---------------------------------------------------------------------------


def _recurrence_window(psi: Fraction):
    """Windows of |(K-1)x - z| < psi inside the cylinder interval."""

    def solve(K: Fraction, z: Fraction, jlo: Fraction, jhi: Fraction) -> Interval | None:
        if psi <= 0:
            return None
        den = K - 1
        e1 = (z - psi) / den
        e2 = (z + psi) / den
        lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
        lo = max(lo, jlo)
        hi = min(hi, jhi)
        return (lo, hi) if lo < hi else None

    return solve


def _preimage_window(target_lo: Fraction, target_hi: Fraction):
    """Preimage of [target_lo, target_hi] under x -> Kx - z, clipped to the cylinder."""

    def solve(K: Fraction, z: Fraction, jlo: Fraction, jhi: Fraction) -> Interval | None:
        if target_hi <= target_lo:
            return None
        e1 = (target_lo + z) / K
        e2 = (target_hi + z) / K
        lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
        lo = max(lo, jlo)
        hi = min(hi, jhi)
        return (lo, hi) if lo < hi else None

    return solve


def _clip_window(inner, clip_lo: Fraction, clip_hi: Fraction):
    def solve(K, z, jlo, jhi):
        win = inner(K, z, jlo, jhi)
        if win is None:
            return None
        lo = max(win[0], clip_lo)
        hi = min(win[1], clip_hi)
        return (lo, hi) if lo < hi else None

    return solve


# ---------------------------------------------------------------------------
# Generic lane: branch-tree walk with Fractions
# ---------------------------------------------------------------------------


def _axis_sum_generic(branches: Sequence[Branch1D], depth: int, window) -> Fraction:
    """Sum of window lengths over all depth-n cylinders of one axis."""

    def rec(level: int, K: Fraction, z: Fraction) -> Fraction:
        if level == depth:
            a = z / K
            b = (1 + z) / K
            jlo, jhi = (a, b) if a <= b else (b, a)
            win = window(K, z, jlo, jhi)
            return win[1] - win[0] if win else ZERO
        total = ZERO
        for br in branches:
            total += rec(level + 1, br.slope * K, br.slope * z + br.offset)
        return total

    return rec(0, ONE, ZERO)


def _axis_intersection_generic(
    branches: Sequence[Branch1D], m: int, n: int, window_m, window_n
) -> Fraction:
    """Sum over depth-n cylinders of |win_m(ancestor) ∩ win_n(leaf)|."""

    def rec(level: int, K: Fraction, z: Fraction, anc: Interval | None) -> Fraction:
        if level == m:
            a = z / K
            b = (1 + z) / K
            jlo, jhi = (a, b) if a <= b else (b, a)
            anc = window_m(K, z, jlo, jhi)
            if anc is None:
                return ZERO
            if m == n:
                return anc[1] - anc[0]
        if level == n:
            a = z / K
            b = (1 + z) / K
            jlo, jhi = (a, b) if a <= b else (b, a)
            win = window_n(K, z, jlo, jhi)
            if win is None:
                return ZERO
            lo = max(win[0], anc[0])
            hi = min(win[1], anc[1])
            return hi - lo if lo < hi else ZERO
        total = ZERO
        for br in branches:
            total += rec(level + 1, br.slope * K, br.slope * z + br.offset, anc)
        return total

    if m == n:
        # intersect the two windows cylinder by cylinder at the common depth
        def window_both(K, z, jlo, jhi):
            a = window_m(K, z, jlo, jhi)
            if a is None:
                return None
            b = window_n(K, z, jlo, jhi)
            if b is None:
                return None
            lo, hi = max(a[0], b[0]), min(a[1], b[1])
            return (lo, hi) if lo < hi else None

        return _axis_sum_generic(branches, n, window_both)
    return rec(0, ONE, ZERO, None)


# ---------------------------------------------------------------------------
# Integer lane: axes with uniform integer |slope| and integer offsets
# ---------------------------------------------------------------------------


def _uniform_leaf_chunks(
    branches: Sequence[Branch1D], depth: int, z0: int = 0, sign0: int = 1
) -> Iterator[tuple[np.ndarray, np.ndarray | None]]:
    """Yield (z, sign) int64 arrays of the depth-n composed maps, lex order.

    sign is None when every slope is positive (then all signs are +1).
    Chunked so that at most ~2^16 leaves are materialized at once.
    """
    b = len(branches)
    slopes = [int(br.slope) for br in branches]
    offsets = [int(br.offset) for br in branches]
    any_negative = any(s < 0 for s in slopes)
    if b**depth <= _BFS_CHUNK:
        z = np.array([z0], dtype=np.int64)
        sign = np.array([sign0], dtype=np.int64) if any_negative else None
        for _ in range(depth):
            cols = []
            sign_cols = []
            for k, w in zip(slopes, offsets):
                cols.append(k * z + w)
                if any_negative:
                    sign_cols.append(np.sign(k) * sign)
            z = np.stack(cols, axis=1).reshape(-1)
            if any_negative:
                sign = np.stack(sign_cols, axis=1).reshape(-1)
        yield z, sign
        return
    for k, w in zip(slopes, offsets):
        yield from _uniform_leaf_chunks(
            branches, depth - 1, z0=k * z0 + w, sign0=(1 if k > 0 else -1) * sign0
        )


def _axis_recurrence_sum_uniform(
    branches: Sequence[Branch1D], depth: int, psi: Fraction
) -> Fraction:
    """Integer-lane version of the recurrence window sum for one axis."""
    if psi <= 0:
        return ZERO
    b = len(branches)
    B = b**depth
    p, q = psi.numerator, psi.denominator
    if q * (B + 1) * B >= _INT64_GUARD or (q * B + p) * B >= _INT64_GUARD:
        raise _LaneOverflow
    acc_pos = 0
    acc_neg = 0
    a_pos = q * (B - 1)
    a_neg = q * (B + 1)
    # totals stay below q(B+1)B < 2^62, so plain int64 sums cannot overflow
    for z, sign in _uniform_leaf_chunks(branches, depth):
        if sign is None:
            pos_mask = None
            zp = z
        else:
            pos_mask = sign > 0
            zp = z[pos_mask]
        # K = +B: J = [z, z+1]/B, window = [zq - p, zq + p]/(q(B-1))
        lo = np.maximum(zp * a_pos, (zp * q - p) * B)
        hi = np.minimum((zp + 1) * a_pos, (zp * q + p) * B)
        acc_pos += int(np.maximum(hi - lo, 0).sum())
        if sign is not None:
            zn = z[~pos_mask]
            # K = -B: J = [-(z+1), -z]/B, window = [-zq - p, -zq + p]/(q(B+1))
            lo = np.maximum((-zn - 1) * a_neg, (-zn * q - p) * B)
            hi = np.minimum(-zn * a_neg, (-zn * q + p) * B)
            acc_neg += int(np.maximum(hi - lo, 0).sum())
    return Fraction(acc_pos, a_pos * B) + Fraction(acc_neg, a_neg * B)


def _axis_preimage_sum_uniform(
    branches: Sequence[Branch1D], depth: int, tlo: Fraction, thi: Fraction
) -> Fraction:
    """Integer-lane sum of |preimage([tlo,thi]) ∩ J| over depth-n cylinders."""
    if thi <= tlo:
        return ZERO
    import math

    b = len(branches)
    B = b**depth
    e = math.lcm(tlo.denominator, thi.denominator)
    rlo = tlo.numerator * (e // tlo.denominator)
    rhi = thi.numerator * (e // thi.denominator)
    if (B + 1) * e >= _INT64_GUARD:
        raise _LaneOverflow
    acc = 0
    # total acc <= e*B < 2^62, so int64 sums cannot overflow
    for z, sign in _uniform_leaf_chunks(branches, depth):
        if sign is None:
            zp = z
        else:
            zp = z[sign > 0]
        # K = +B: preimage nums (rlo + z e, rhi + z e) over eB; J scaled by e
        lo = np.maximum(zp * e, rlo + zp * e)
        hi = np.minimum((zp + 1) * e, rhi + zp * e)
        acc += int(np.maximum(hi - lo, 0).sum())
        if sign is not None:
            zn = z[sign < 0]
            lo = np.maximum(-(zn + 1) * e, -rhi - zn * e)
            hi = np.minimum(-zn * e, -rlo - zn * e)
            acc += int(np.maximum(hi - lo, 0).sum())
    return Fraction(acc, e * B)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


def _axis_event_sum(map_spec: MapSpec, axis: int, depth: int, kind: str, window, psi=None, tlo=None, thi=None) -> Fraction:
    branches = map_spec.axes[axis]
    if map_spec.axis_uniform_abs_base(axis) is not None:
        try:
            if kind == "recurrence":
                return _axis_recurrence_sum_uniform(branches, depth, psi)
            if kind in ("target", "pullback"):
                return _axis_preimage_sum_uniform(branches, depth, tlo, thi)
        except _LaneOverflow:
            pass
    return _axis_sum_generic(branches, depth, window)


def measure(event: EventSet) -> Fraction:
    """Exact measure of the event, summed over its cylinder decomposition."""
    m = event.map
    if event.kind == "recurrence":
        total = ONE
        for axis in range(m.dimension):
            psi = event.radii[axis]
            total *= _axis_event_sum(
                m, axis, event.depth, "recurrence", _recurrence_window(psi), psi=psi
            )
            if total == 0:
                return ZERO
        return total
    if event.kind == "target":
        total = ONE
        for axis in range(m.dimension):
            lo = max(ZERO, event.center[axis] - event.radii[axis])
            hi = min(ONE, event.center[axis] + event.radii[axis])
            total *= _axis_event_sum(
                m, axis, event.depth, "target", _preimage_window(lo, hi), tlo=lo, thi=hi
            )
            if total == 0:
                return ZERO
        return total
    if event.kind == "pullback":
        total = ZERO
        for rect in event.rects:
            piece = ONE
            for axis in range(m.dimension):
                lo, hi = rect[axis]
                piece *= _axis_event_sum(
                    m, axis, event.depth, "pullback", _preimage_window(lo, hi), tlo=lo, thi=hi
                )
                if piece == 0:
                    break
            total += piece
        return total
    raise ValueError(f"unknown event kind {event.kind!r}")


def measure_within(event: EventSet, rect) -> Fraction:
    """Exact measure of (event ∩ rect) for a coordinate rectangle."""
    clip = _normalize_rect(event.map.dimension, rect)
    m = event.map
    if event.kind == "recurrence":
        total = ONE
        for axis in range(m.dimension):
            win = _clip_window(_recurrence_window(event.radii[axis]), *clip[axis])
            total *= _axis_sum_generic(m.axes[axis], event.depth, win)
            if total == 0:
                return ZERO
        return total
    if event.kind in ("target", "pullback"):
        rect_list = (
            [_target_rect(event)] if event.kind == "target" else list(event.rects)
        )
        total = ZERO
        for r in rect_list:
            piece = ONE
            for axis in range(m.dimension):
                lo, hi = r[axis]
                win = _clip_window(_preimage_window(lo, hi), *clip[axis])
                piece *= _axis_sum_generic(m.axes[axis], event.depth, win)
                if piece == 0:
                    break
            total += piece
        return total
    raise ValueError(f"unknown event kind {event.kind!r}")


def _target_rect(event: EventSet) -> Rect:
    out = []
    for axis in range(event.map.dimension):
        lo = max(ZERO, event.center[axis] - event.radii[axis])
        hi = min(ONE, event.center[axis] + event.radii[axis])
        out.append((lo, max(lo, hi)))
    return tuple(out)


def _axis_windows_of(event: EventSet, rect_choice: Rect | None):
    """Per-axis window solvers for one rectangle choice of the event."""
    if event.kind == "recurrence":
        return [_recurrence_window(event.radii[a]) for a in range(event.map.dimension)]
    if event.kind == "target":
        rect = _target_rect(event)
        return [_preimage_window(*rect[a]) for a in range(event.map.dimension)]
    if event.kind == "pullback":
        return [_preimage_window(*rect_choice[a]) for a in range(event.map.dimension)]
    raise ValueError(event.kind)


def _rect_choices(event: EventSet) -> Sequence[Rect | None]:
    return list(event.rects) if event.kind == "pullback" else [None]


def measure_intersection(a: EventSet, b: EventSet) -> Fraction:
    """Exact measure of the intersection of two events on the same map.

    The shallower event's rectangles are refined through the deeper
    partition, axis by axis.
    """
    if a.map is not b.map and a.map != b.map:
        raise ValueError("events live on different maps")
    if a.depth > b.depth:
        a, b = b, a
    total = ZERO
    for ra in _rect_choices(a):
        wins_a = _axis_windows_of(a, ra)
        for rb in _rect_choices(b):
            wins_b = _axis_windows_of(b, rb)
            piece = ONE
            for axis in range(a.map.dimension):
                piece *= _axis_intersection_generic(
                    a.map.axes[axis], a.depth, b.depth, wins_a[axis], wins_b[axis]
                )
                if piece == 0:
                    break
            total += piece
    return total


def phi_values(
    map_spec: MapSpec, rate: RateFunction, N: int, cap: int = DEFAULT_CYLINDER_CAP
) -> list[Fraction]:
    """Exact mu(A_n) for n = 1..N."""
    return [measure(event_recurrence(map_spec, rate, n, cap=cap)) for n in range(1, N + 1)]


def phi_sum(
    map_spec: MapSpec, rate: RateFunction, N: int, cap: int = DEFAULT_CYLINDER_CAP
) -> Fraction:
    """Exact Phi(N) = sum_{n<=N} mu(A_n)."""
    total = ZERO
    for v in phi_values(map_spec, rate, N, cap=cap):
        total += v
    return total


# ---------------------------------------------------------------------------
# Mixing deficit
# ---------------------------------------------------------------------------


def _normalize_f(map_spec: MapSpec, f) -> list[Rect]:
    if isinstance(f, EventSet):
        if f.kind != "pullback":
            raise ValueError("pass pullback events or rectangle lists as F")
        return list(f.rects)
    f = list(f)
    if f and not isinstance(f[0][0], (tuple, list)):
        f = [f]  # a single rectangle was passed
    return [_normalize_rect(map_spec.dimension, r) for r in f]


def mixing_deficit(
    map_spec: MapSpec,
    e_rect,
    f,
    n: int,
    cap: int = DEFAULT_CYLINDER_CAP,
) -> Fraction:
    """Exact mu(E ∩ T^{-n}F) - mu(E) mu(F) for a rectangle E and disjoint-rect F."""
    _check_cap(map_spec, n, cap)
    e = _normalize_rect(map_spec.dimension, e_rect)
    rects = _normalize_f(map_spec, f)
    mu_e = rect_volume(e)
    mu_f = sum((rect_volume(r) for r in rects), ZERO)
    if map_spec.dimension == 1:
        joint = _mixing_joint_1d(map_spec, e[0], rects, n)
    else:
        joint = ZERO
        for r in rects:
            piece = ONE
            for axis in range(map_spec.dimension):
                lo, hi = r[axis]
                win = _clip_window(_preimage_window(lo, hi), *e[axis])
                piece *= _axis_sum_generic(map_spec.axes[axis], n, win)
                if piece == 0:
                    break
            joint += piece
    return joint - mu_e * mu_f


def _mixing_joint_1d(
    map_spec: MapSpec, e_iv: Interval, rects: Sequence[Rect], n: int
) -> Fraction:
    """mu(E ∩ T^{-n}F) in one dimension via forward images of E ∩ J.

    T^n is a bijection from each cylinder J onto [0,1] scaling measure by
    |K|, so mu(E ∩ J ∩ T^{-n}F) = mu(T^n(E ∩ J) ∩ F) / |K|; the forward
    image is an interval, and F overlap is a sorted-interval sweep.
    """
    import math

    f_iv = sorted((r[0][0], r[0][1]) for r in rects)
    branches = map_spec.axes[0]
    base = map_spec.axis_uniform_abs_base(0)
    if base is None:
        return _mixing_joint_1d_generic(branches, e_iv, f_iv, n)
    B = base**n
    e_den = math.lcm(e_iv[0].denominator, e_iv[1].denominator)
    elo = e_iv[0].numerator * (e_den // e_iv[0].denominator)
    ehi = e_iv[1].numerator * (e_den // e_iv[1].denominator)
    f_den = 1
    for lo, hi in f_iv:
        f_den = math.lcm(f_den, lo.denominator, hi.denominator)
    f_scaled = [
        (int(lo * f_den), int(hi * f_den)) for lo, hi in f_iv
    ]
    den = e_den * B
    acc = 0
    for z_arr, sign_arr in _uniform_leaf_chunks(branches, n):
        signs = sign_arr.tolist() if sign_arr is not None else [1] * len(z_arr)
        for z, sg in zip(z_arr.tolist(), signs):
            # E ∩ J over den e_den * B
            if sg > 0:
                xlo = max(z * e_den, elo * B)
                xhi = min((z + 1) * e_den, ehi * B)
            else:
                xlo = max(-(z + 1) * e_den, elo * B)
                xhi = min(-z * e_den, ehi * B)
            if xhi <= xlo:
                continue
            # forward image: y = sg*B*x - z, numerators over den = e_den*B
            y1 = sg * B * xlo - z * den
            y2 = sg * B * xhi - z * den
            if y1 > y2:
                y1, y2 = y2, y1
            # overlap with F over the common denominator den*f_den,
            # then divide by |K| = B for the preimage measure
            for flo, fhi in f_scaled:
                lo = max(y1 * f_den, flo * den)
                hi = min(y2 * f_den, fhi * den)
                if hi > lo:
                    acc += hi - lo
    return Fraction(acc, den * f_den * B)


def _mixing_joint_1d_generic(
    branches: Sequence[Branch1D], e_iv: Interval, f_iv, n: int
) -> Fraction:
    def rec(level: int, K: Fraction, z: Fraction) -> Fraction:
        if level == n:
            a = z / K
            b = (1 + z) / K
            jlo, jhi = (a, b) if a <= b else (b, a)
            xlo = max(jlo, e_iv[0])
            xhi = min(jhi, e_iv[1])
            if xhi <= xlo:
                return ZERO
            y1 = K * xlo - z
            y2 = K * xhi - z
            if y1 > y2:
                y1, y2 = y2, y1
            total = ZERO
            for flo, fhi in f_iv:
                lo = max(y1, flo)
                hi = min(y2, fhi)
                if hi > lo:
                    total += hi - lo
            return total / abs(K)
        total = ZERO
        for br in branches:
            total += rec(level + 1, br.slope * K, br.slope * z + br.offset)
        return total

    return rec(0, ONE, ZERO)
