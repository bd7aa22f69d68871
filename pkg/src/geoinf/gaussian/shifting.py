"""Shifting (monotonization): replace every fiber by the up-ray of the same Gaussian mass."""
from __future__ import annotations

import math

import numpy as np

from ..numerics import normal_isf, normal_pdf
from .intervals import IntervalUnion
from .sets import FiberSet, GridSet, HalfSpace, Orthant, _as_points, _check_coord


def _threshold_from_mass(mass: np.ndarray, empty: np.ndarray, full: np.ndarray) -> np.ndarray:
    """Upper-tail quantile of the mass; empty and full fibers are decided combinatorially."""
    inner = np.clip(mass, 1e-300, 1.0 - 1e-16)
    tau = np.asarray(normal_isf(inner), dtype=float)
    tau = np.where(empty, math.inf, tau)
    return np.where(full, -math.inf, tau)


def _shift_grid(A: GridSet, i: int) -> GridSet:
    ax = i - 1
    moved = np.moveaxis(A.table, ax, -1)
    masses = A.exact_fiber_masses(i)
    empty = ~moved.any(axis=-1)
    full = moved.all(axis=-1)
    tau = _threshold_from_mass(masses, empty, full)
    new_breaks = np.unique(tau[np.isfinite(tau)])
    lower = np.concatenate([[-math.inf], new_breaks])
    # a cell [lower_c, ...) lies in the up-ray [tau, inf) iff lower_c >= tau
    table = lower >= tau[..., None]
    breaks = list(A.breaks)
    breaks[ax] = new_breaks
    return GridSet(breaks, np.moveaxis(table, -1, ax), name=f"M{i}({A.name})")


def _shift_halfspace(A: HalfSpace, i: int) -> HalfSpace:
    if A.w[i - 1] >= 0:
        return A
    w = A.w.copy()
    w[i - 1] = -w[i - 1]
    return HalfSpace(w, A.c, name=f"M{i}({A.name})")


class ShiftedSet(FiberSet):
    """M_i applied to a set without a closed-form shift.

    Membership and the coordinate-i fiber are exact given the base fiber
    masses. Fiber masses in other coordinates are averaged over the midpoints
    of ``fiber_budget`` equal-mass strata of the line, so repeated calls are
    deterministic.
    """

    def __init__(self, base: FiberSet, i: int, fiber_budget: int = 2048):
        _check_coord(i, base.n)
        self.base = base
        self.i = i
        self.n = base.n
        self.fiber_budget = fiber_budget
        self.name = f"M{i}({base.describe()})"

    def threshold(self, i: int, X) -> np.ndarray:
        if i != self.i:
            raise NotImplementedError("threshold of a shifted set is only available in the shifted coordinate")
        X = _as_points(X, self.n)
        m = self.base.fiber_mass(i, X)
        return _threshold_from_mass(m, m <= 0.0, m >= 1.0)

    def contains(self, X) -> np.ndarray:
        X = _as_points(X, self.n)
        return X[:, self.i - 1] >= self.threshold(self.i, X)

    def fiber(self, i: int, x) -> IntervalUnion:
        if i != self.i:
            raise NotImplementedError("fiber of a shifted set is only available in the shifted coordinate")
        return IntervalUnion.up_ray(float(self.threshold(i, x)[0]))

    def fiber_mass(self, i: int, X) -> np.ndarray:
        X = _as_points(X, self.n)
        if i == self.i:
            return self.base.fiber_mass(i, X)
        # stratified grid: midpoints of fiber_budget equal-mass cells
        ys = normal_isf((np.arange(self.fiber_budget) + 0.5) / self.fiber_budget)
        out = np.empty(len(X))
        for k, x in enumerate(X):
            P = np.repeat(x[None, :], len(ys), axis=0)
            P[:, i - 1] = ys
            out[k] = self.contains(P).mean()
        return out

    def fiber_content(self, i: int, X) -> np.ndarray:
        if i != self.i:
            raise NotImplementedError("Minkowski content of a shifted set is only available in the shifted coordinate")
        return normal_pdf(self.threshold(i, X))

    def is_increasing(self) -> bool | None:
        return None

    def describe(self) -> str:
        return self.name


def shift(A: FiberSet, i: int, fiber_budget: int = 2048) -> FiberSet:
    """M_i(A): the fiber over each x^(-i) becomes [isf(mass), inf).

    Grid sets and half-spaces are shifted exactly and stay in their class;
    orthants (already increasing) are returned unchanged.
    """
    _check_coord(i, A.n)
    if isinstance(A, GridSet):
        return _shift_grid(A, i)
    if isinstance(A, HalfSpace):
        return _shift_halfspace(A, i)
    if isinstance(A, Orthant):
        return A
    return ShiftedSet(A, i, fiber_budget)


def monotonize(A: FiberSet, fiber_budget: int = 2048) -> FiberSet:
    """M = M_1 o M_2 o ... o M_n, so M_n is applied first."""
    out = A
    for i in range(A.n, 0, -1):
        out = shift(out, i, fiber_budget)
    return out
