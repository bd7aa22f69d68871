"""Finite unions of intervals on the real line, the fiber representation of Gaussian sets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import PreconditionError
from ..numerics import normal_cdf, normal_pdf, normal_sf


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def mass(self) -> float:
        """Standard Gaussian measure, using the upper tail when both ends are positive."""
        if self.lo >= 0.0:
            return float(normal_sf(self.lo) - normal_sf(self.hi))
        return float(normal_cdf(self.hi) - normal_cdf(self.lo))


def _empty(iv: Interval) -> bool:
    if iv.lo > iv.hi:
        return True
    if iv.lo == iv.hi:
        return not (iv.lo_closed and iv.hi_closed) or math.isinf(iv.lo)
    return False


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise separated intervals.

    Build with :meth:`of`, which canonicalises. Intervals that merely touch are
    merged even if the shared endpoint is missing from both; that changes the set
    by a single point, which affects neither its Gaussian mass nor its Minkowski
    content.
    """

    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        prev = None
        for iv in self.intervals:
            if _empty(iv):
                raise PreconditionError(f"empty interval {iv} in canonical union")
            if prev is not None and not (prev.hi < iv.lo):
                raise PreconditionError("intervals must be sorted and separated (not overlapping or touching)")
            prev = iv

    @classmethod
    def of(cls, parts: Iterable) -> "IntervalUnion":
        """Canonical union of ``Interval`` objects or ``(lo, hi)`` / ``(lo, hi, lo_closed, hi_closed)`` tuples."""
        ivs = []
        for p in parts:
            iv = p if isinstance(p, Interval) else Interval(*p)
            if not _empty(iv):
                ivs.append(iv)
        ivs.sort(key=lambda v: (v.lo, not v.lo_closed))
        merged: list[Interval] = []
        for iv in ivs:
            if merged and iv.lo <= merged[-1].hi:
                last = merged[-1]
                if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed):
                    merged[-1] = Interval(last.lo, iv.hi, last.lo_closed, iv.hi_closed)
            else:
                merged.append(iv)
        return cls(tuple(merged))

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def real_line(cls) -> "IntervalUnion":
        return cls((Interval(-math.inf, math.inf, False, False),))

    @classmethod
    def up_ray(cls, t: float) -> "IntervalUnion":
        """[t, inf); empty for t = +inf and the whole line for t = -inf."""
        if t == math.inf:
            return cls.empty()
        return cls((Interval(t, math.inf, not math.isinf(t), False),))

    @classmethod
    def point(cls, a: float) -> "IntervalUnion":
        return cls((Interval(a, a, True, True),))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def mass(self) -> float:
        return float(sum(iv.mass() for iv in self.intervals))

    def is_up_ray(self) -> bool:
        return len(self.intervals) == 1 and self.intervals[0].hi == math.inf

    def is_real_line(self) -> bool:
        return self.is_up_ray() and self.intervals[0].lo == -math.inf

    def contains(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=bool)
        for iv in self.intervals:
            lo_ok = y >= iv.lo if iv.lo_closed else y > iv.lo
            hi_ok = y <= iv.hi if iv.hi_closed else y < iv.hi
            out |= lo_ok & hi_ok
        return out

    def affine_mass(self, center, scale: float):
        """P[center + scale * Z in self] for standard normal Z; vectorised over ``center``."""
        c = np.asarray(center, dtype=float)
        tot = np.zeros(c.shape)
        for iv in self.intervals:
            a = (iv.lo - c) / scale
            b = (iv.hi - c) / scale
            tot = tot + np.where(a >= 0.0, normal_sf(a) - normal_sf(b), normal_cdf(b) - normal_cdf(a))
        return tot


def minkowski_content(u: IntervalUnion) -> float:
    """Gaussian lower Minkowski content of a canonical interval union.

    Every finite endpoint of a nondegenerate interval contributes phi(endpoint);
    an isolated point a is approached from both sides and contributes 2 phi(a).
    """
    u.validate()
    total = 0.0
    for iv in u.intervals:
        if iv.is_point:
            total += 2.0 * normal_pdf(iv.lo)
            continue
        if math.isfinite(iv.lo):
            total += normal_pdf(iv.lo)
        if math.isfinite(iv.hi):
            total += normal_pdf(iv.hi)
    return total
