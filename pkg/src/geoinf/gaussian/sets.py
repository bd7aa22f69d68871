"""Subsets of R^n described through their one-dimensional fibers, and smooth test functions.

Coordinates are 1-based throughout. Fiber and threshold oracles take full
points ``X`` of shape (m, n); the entry in the queried coordinate is ignored.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, PreconditionError
from ..numerics import binormal_cdf, binormal_sf, normal_cdf, normal_pdf, normal_sf
from .intervals import Interval, IntervalUnion, minkowski_content


def _as_points(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise DomainError(f"points must have {n} coordinates, got {X.shape[1]}")
    return X


def _check_coord(i: int, n: int) -> None:
    if not (1 <= i <= n):
        raise DomainError(f"coordinate {i} out of range 1..{n}")


class FiberSet:
    """A set in R^n with a membership predicate and a fiber oracle.

    Subclasses override :meth:`contains` and :meth:`fiber`; the vectorised
    helpers fall back to per-point fiber evaluation. ``exact_*`` methods return
    ``None`` when no closed form is available.
    """

    n: int

    def contains(self, X) -> np.ndarray:
        raise NotImplementedError

    def fiber(self, i: int, x) -> IntervalUnion:
        raise NotImplementedError

    def fiber_mass(self, i: int, X) -> np.ndarray:
        X = _as_points(X, self.n)
        return np.array([self.fiber(i, x).mass() for x in X])

    def fiber_content(self, i: int, X) -> np.ndarray:
        X = _as_points(X, self.n)
        return np.array([minkowski_content(self.fiber(i, x)) for x in X])

    def is_increasing(self) -> bool | None:
        """True/False when known exactly, None when only a spot check could tell."""
        return None

    def exact_measure(self) -> float | None:
        return None

    def exact_influence(self, i: int) -> float | None:
        return None

    def exact_noise_stability(self, rho: float) -> float | None:
        return None

    def describe(self) -> str:
        return type(self).__name__


class PredicateSet(FiberSet):
    """User-supplied membership predicate and fiber oracle."""

    def __init__(self, n: int, contains: Callable[[np.ndarray], np.ndarray],
                 fiber: Callable[[int, np.ndarray], IntervalUnion], name: str = "predicate"):
        self.n = n
        self._contains = contains
        self._fiber = fiber
        self.name = name

    def contains(self, X) -> np.ndarray:
        return np.asarray(self._contains(_as_points(X, self.n)), dtype=bool)

    def fiber(self, i: int, x) -> IntervalUnion:
        _check_coord(i, self.n)
        return self._fiber(i, np.asarray(x, dtype=float))

    def describe(self) -> str:
        return self.name


class IncreasingSet(FiberSet):
    """Increasing set given by its threshold oracle t_i(A; x^(-i)).

    The fiber in coordinate i is [t_i, inf), with t_i = +inf meaning an empty
    fiber and t_i = -inf the whole line.
    """

    def __init__(self, n: int, threshold: Callable[[int, np.ndarray], np.ndarray], name: str = "increasing"):
        self.n = n
        self._threshold = threshold
        self.name = name

    def threshold(self, i: int, X) -> np.ndarray:
        _check_coord(i, self.n)
        return np.asarray(self._threshold(i, _as_points(X, self.n)), dtype=float)

    def contains(self, X) -> np.ndarray:
        X = _as_points(X, self.n)
        return X[:, 0] >= self.threshold(1, X)

    def fiber(self, i: int, x) -> IntervalUnion:
        return IntervalUnion.up_ray(float(self.threshold(i, np.asarray(x, dtype=float))[0]))

    def fiber_mass(self, i: int, X) -> np.ndarray:
        return normal_sf(self.threshold(i, X))

    def fiber_content(self, i: int, X) -> np.ndarray:
        return normal_pdf(self.threshold(i, X))

    def is_increasing(self) -> bool:
        return True

    def describe(self) -> str:
        return self.name


class HalfSpace(FiberSet):
    """{x : w . x > c}. Increasing exactly when every weight is nonnegative."""

    def __init__(self, w: Sequence[float], c: float, name: str | None = None):
        self.w = np.asarray(w, dtype=float)
        self.n = len(self.w)
        self.c = float(c)
        self.norm = float(np.linalg.norm(self.w))
        self.name = name or f"halfspace(w={np.round(self.w, 6).tolist()}, c={self.c:.6g})"

    @property
    def level(self) -> float:
        """c / |w|: the set is {u . x > level} for the unit normal u."""
        if self.norm == 0.0:
            return -math.inf if self.c < 0 else math.inf
        return self.c / self.norm

    def contains(self, X) -> np.ndarray:
        return _as_points(X, self.n) @ self.w > self.c

    def _endpoint(self, i: int, X) -> np.ndarray:
        X = _as_points(X, self.n)
        wi = self.w[i - 1]
        rest = X @ self.w - X[:, i - 1] * wi
        return (self.c - rest) / wi

    def threshold(self, i: int, X) -> np.ndarray:
        _check_coord(i, self.n)
        wi = self.w[i - 1]
        if wi > 0:
            return self._endpoint(i, X)
        if wi < 0:
            raise PreconditionError("half-space is decreasing in this coordinate; no threshold")
        X = _as_points(X, self.n)
        inside = X @ self.w > self.c
        return np.where(inside, -math.inf, math.inf)

    def fiber(self, i: int, x) -> IntervalUnion:
        _check_coord(i, self.n)
        wi = self.w[i - 1]
        x = np.asarray(x, dtype=float)
        if wi == 0.0:
            inside = bool(x @ self.w > self.c)
            return IntervalUnion.real_line() if inside else IntervalUnion.empty()
        e = float(self._endpoint(i, x)[0])
        if wi > 0:
            return IntervalUnion((Interval(e, math.inf, False, False),))
        return IntervalUnion((Interval(-math.inf, e, False, False),))

    def fiber_mass(self, i: int, X) -> np.ndarray:
        wi = self.w[i - 1]
        if wi == 0.0:
            return (_as_points(X, self.n) @ self.w > self.c).astype(float)
        e = self._endpoint(i, X)
        return normal_sf(e) if wi > 0 else normal_cdf(e)

    def fiber_content(self, i: int, X) -> np.ndarray:
        if self.w[i - 1] == 0.0:
            return np.zeros(len(_as_points(X, self.n)))
        return normal_pdf(self._endpoint(i, X))

    def is_increasing(self) -> bool:
        return bool(np.all(self.w >= 0))

    def exact_measure(self) -> float:
        return float(normal_sf(self.level))

    def exact_influence(self, i: int) -> float:
        _check_coord(i, self.n)
        if self.norm == 0.0:
            return 0.0
        return abs(self.w[i - 1]) / self.norm * float(normal_pdf(self.level))

    def exact_noise_stability(self, rho: float) -> float:
        a = self.level
        if math.isinf(a):
            return 1.0 if a < 0 else 0.0
        return float(binormal_sf(a, a, math.sqrt(1.0 - rho * rho)))

    def describe(self) -> str:
        return self.name


def halfspace(t: float, n: int) -> HalfSpace:
    """{x : n^(-1/2) sum x_j > -t}."""
    return HalfSpace(np.full(n, 1.0 / math.sqrt(n)), -t, name=f"halfspace:{t:g}:{n}")


def threshold_pair(t: float, n: int) -> tuple[HalfSpace, HalfSpace]:
    """The pair {n^(-1/2) sum x_j > -t}, {n^(-1/2) sum x_j > t}."""
    w = np.full(n, 1.0 / math.sqrt(n))
    return (HalfSpace(w, -t, name=f"threshold-pair-A:{t:g}:{n}"),
            HalfSpace(w, t, name=f"threshold-pair-B:{t:g}:{n}"))


class Orthant(FiberSet):
    """{x : x_j > a_j for all j}; a_j = -inf leaves coordinate j unconstrained."""

    def __init__(self, levels: Sequence[float], name: str | None = None):
        self.a = np.asarray(levels, dtype=float)
        self.n = len(self.a)
        self.name = name or f"orthant({self.a.tolist()})"

    def contains(self, X) -> np.ndarray:
        return np.all(_as_points(X, self.n) > self.a, axis=1)

    def threshold(self, i: int, X) -> np.ndarray:
        _check_coord(i, self.n)
        X = _as_points(X, self.n)
        others = np.delete(X, i - 1, axis=1) > np.delete(self.a, i - 1)
        return np.where(np.all(others, axis=1), self.a[i - 1], math.inf)

    def fiber(self, i: int, x) -> IntervalUnion:
        t = float(self.threshold(i, x)[0])
        if t == math.inf:
            return IntervalUnion.empty()
        return IntervalUnion((Interval(t, math.inf, False, False),))

    def fiber_mass(self, i: int, X) -> np.ndarray:
        return normal_sf(self.threshold(i, X))

    def fiber_content(self, i: int, X) -> np.ndarray:
        return normal_pdf(self.threshold(i, X))

    def is_increasing(self) -> bool:
        return True

    def exact_measure(self) -> float:
        return float(np.prod(normal_sf(self.a)))

    def exact_influence(self, i: int) -> float:
        _check_coord(i, self.n)
        return float(normal_pdf(self.a[i - 1]) * np.prod(normal_sf(np.delete(self.a, i - 1))))

    def exact_noise_stability(self, rho: float) -> float:
        r = math.sqrt(1.0 - rho * rho)
        return float(np.prod([binormal_sf(a, a, r) if math.isfinite(a) else 1.0 for a in self.a]))

    def describe(self) -> str:
        return self.name


def quadrant(n: int = 2) -> Orthant:
    return Orthant(np.zeros(n), name=f"quadrant:{n}")


def _cell_masses(breaks: np.ndarray) -> np.ndarray:
    edges = np.concatenate([[-math.inf], breaks, [math.inf]])
    lo, hi = edges[:-1], edges[1:]
    return np.where(lo >= 0.0, normal_sf(lo) - normal_sf(hi), normal_cdf(hi) - normal_cdf(lo))


def _cell_representatives(breaks: np.ndarray) -> np.ndarray:
    if len(breaks) == 0:
        return np.zeros(1)
    inner = 0.5 * (breaks[:-1] + breaks[1:])
    return np.concatenate([[breaks[0] - 1.0], inner, [breaks[-1] + 1.0]])


class GridSet(FiberSet):
    """Union of cells of a product grid.

    Coordinate j is cut at the sorted finite ``breaks[j]`` into cells
    (-inf, b_0), [b_0, b_1), ..., [b_last, inf); ``table`` is a boolean array
    with one entry per cell of the product. Box unions, lifted discrete sets and
    the images of such sets under shifting are all of this form, and every
    Gaussian statistic of a GridSet is an exact finite sum.
    """

    def __init__(self, breaks: Sequence[Sequence[float]], table, name: str = "grid"):
        self.breaks = [np.asarray(b, dtype=float) for b in breaks]
        self.n = len(self.breaks)
        for b in self.breaks:
            if np.any(~np.isfinite(b)) or np.any(np.diff(b) <= 0):
                raise PreconditionError("grid breaks must be finite and strictly increasing")
        tab = np.asarray(table, dtype=bool)
        shape = tuple(len(b) + 1 for b in self.breaks)
        if tab.shape != shape:
            raise PreconditionError(f"table shape {tab.shape} does not match grid {shape}")
        self.table = tab
        self.name = name

    @classmethod
    def full(cls, n: int) -> "GridSet":
        return cls([[]] * n, np.ones((1,) * n, dtype=bool), name=f"full:{n}")

    @classmethod
    def empty(cls, n: int) -> "GridSet":
        return cls([[]] * n, np.zeros((1,) * n, dtype=bool), name=f"empty:{n}")

    @classmethod
    def from_boxes(cls, n: int, boxes: Sequence[Sequence[tuple[float, float]]], name: str = "boxes") -> "GridSet":
        """Union of boxes, each a list of n (lo, hi) pairs (infinite ends allowed)."""
        breaks = []
        for j in range(n):
            vals = {v for box in boxes for v in box[j] if math.isfinite(v)}
            breaks.append(np.array(sorted(vals)))
        reps = [_cell_representatives(b) for b in breaks]
        mesh = np.meshgrid(*reps, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        inside = np.zeros(len(pts), dtype=bool)
        for box in boxes:
            lo = np.array([b[0] for b in box])
            hi = np.array([b[1] for b in box])
            inside |= np.all((pts >= lo) & (pts < hi), axis=1)
        return cls(breaks, inside.reshape(mesh[0].shape), name=name)

    # -- geometry ----------------------------------------------------------------
    def cell_index(self, X) -> tuple[np.ndarray, ...]:
        X = _as_points(X, self.n)
        return tuple(np.searchsorted(b, X[:, j], side="right") for j, b in enumerate(self.breaks))

    def contains(self, X) -> np.ndarray:
        return self.table[self.cell_index(X)]

    def _fiber_rows(self, i: int, X) -> np.ndarray:
        """Table rows along axis i for the cells containing each point's other coordinates."""
        X = _as_points(X, self.n)
        idx = list(self.cell_index(X))
        moved = np.moveaxis(self.table, i - 1, -1)
        del idx[i - 1]
        if not idx:
            return np.broadcast_to(moved, (len(X),) + moved.shape)
        return moved[tuple(idx)]

    def fiber(self, i: int, x) -> IntervalUnion:
        _check_coord(i, self.n)
        row = self._fiber_rows(i, np.asarray(x, dtype=float))[0]
        edges = np.concatenate([[-math.inf], self.breaks[i - 1], [math.inf]])
        return IntervalUnion.of((edges[c], edges[c + 1], True, False) for c in np.flatnonzero(row))

    def fiber_mass(self, i: int, X) -> np.ndarray:
        _check_coord(i, self.n)
        rows = self._fiber_rows(i, X)
        return rows @ _cell_masses(self.breaks[i - 1])

    def _boundary_weights(self, i: int) -> np.ndarray:
        """Per fiber (axis i last): Minkowski content = sum of phi(b) over breaks where membership flips."""
        moved = np.moveaxis(self.table, i - 1, -1).astype(float)
        flips = np.abs(np.diff(moved, axis=-1))
        return flips @ normal_pdf(self.breaks[i - 1]) if flips.shape[-1] else np.zeros(moved.shape[:-1])

    def fiber_content(self, i: int, X) -> np.ndarray:
        _check_coord(i, self.n)
        rows = self._fiber_rows(i, X).astype(float)
        if len(self.breaks[i - 1]) == 0:
            return np.zeros(len(rows))
        return np.abs(np.diff(rows, axis=-1)) @ normal_pdf(self.breaks[i - 1])

    def threshold(self, i: int, X) -> np.ndarray:
        """Lower end of the fiber; the fiber must be an up-ray (or empty / the whole line)."""
        rows = self._fiber_rows(i, X)
        edges = np.concatenate([[-math.inf], self.breaks[i - 1]])
        k = rows.shape[-1]
        first = np.where(rows.any(axis=-1), rows.argmax(axis=-1), k)
        # up-ray iff every cell from the first member onwards is a member
        tail_ok = rows.sum(axis=-1) == k - first
        if not np.all(tail_ok):
            raise PreconditionError("fiber is not an up-ray; set is not increasing in this coordinate")
        return np.where(first < k, edges[np.minimum(first, k - 1)], math.inf)

    def is_increasing(self) -> bool:
        t = self.table
        return all(bool(np.all(np.diff(t.astype(np.int8), axis=ax) >= 0)) for ax in range(self.n))

    # -- exact statistics ----------------------------------------------------------
    def _contract(self, arr: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
        for ax, m in enumerate(mats):
            arr = np.moveaxis(np.tensordot(arr, m, axes=([ax], [0])), -1, ax)
        return arr

    def exact_measure(self) -> float:
        masses = [_cell_masses(b) for b in self.breaks]
        out = self.table.astype(float)
        for m in masses:
            out = np.tensordot(out, m, axes=([0], [0]))
        return float(out)

    def exact_influence(self, i: int) -> float:
        _check_coord(i, self.n)
        content = self._boundary_weights(i)
        others = [_cell_masses(b) for j, b in enumerate(self.breaks) if j != i - 1]
        for m in others:
            content = np.tensordot(content, m, axes=([0], [0]))
        return float(content)

    def exact_fiber_masses(self, i: int) -> np.ndarray:
        """Gaussian mass of the fiber over every cell of the other coordinates (axis i removed)."""
        moved = np.moveaxis(self.table, i - 1, -1).astype(float)
        return moved @ _cell_masses(self.breaks[i - 1])

    def transition_matrix(self, j: int, r: float) -> np.ndarray:
        """K[c, c'] = P[W in cell c, W' in cell c'] along coordinate j for correlation r."""
        edges = np.concatenate([[-math.inf], self.breaks[j], [math.inf]])
        F = binormal_cdf(edges[:, None], edges[None, :], r)
        return F[1:, 1:] - F[:-1, 1:] - F[1:, :-1] + F[:-1, :-1]

    def exact_noise_stability(self, rho: float) -> float:
        r = math.sqrt(1.0 - rho * rho)
        t = self.table.astype(float)
        kt = self._contract(t, [self.transition_matrix(j, r) for j in range(self.n)])
        return float(np.sum(t * kt))

    def refine(self, breaks: Sequence[Sequence[float]]) -> "GridSet":
        """Same set on a finer grid; ``breaks`` must contain the current breaks."""
        breaks = [np.asarray(b, dtype=float) for b in breaks]
        reps = [_cell_representatives(b) for b in breaks]
        mesh = np.meshgrid(*reps, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        return GridSet(breaks, self.contains(pts).reshape(mesh[0].shape), name=self.name)

    def describe(self) -> str:
        return self.name


def common_refinement(A: GridSet, B: GridSet) -> tuple[GridSet, GridSet]:
    breaks = [np.union1d(a, b) for a, b in zip(A.breaks, B.breaks)]
    return A.refine(breaks), B.refine(breaks)


def exact_intersection_measure(A: FiberSet, B: FiberSet) -> float | None:
    """mu(A intersect B) when both sets have a closed form, else None."""
    if isinstance(A, HalfSpace) and isinstance(B, HalfSpace):
        if A.norm == 0.0 or B.norm == 0.0:
            return None
        corr = float(np.clip(A.w @ B.w / (A.norm * B.norm), -1.0, 1.0))
        return float(binormal_sf(A.level, B.level, corr))
    if isinstance(A, Orthant) and isinstance(B, Orthant):
        return float(np.prod(normal_sf(np.maximum(A.a, B.a))))
    if isinstance(A, GridSet) and isinstance(B, GridSet):
        a, b = common_refinement(A, B)
        return GridSet(a.breaks, a.table & b.table).exact_measure()
    return None


def random_grid_set(n: int, n_breaks: int, rng: np.random.Generator, density: float = 0.5,
                    increasing: bool = False) -> GridSet:
    """Random union of grid cells; breaks drawn from N(0, 1.5^2).

    With ``increasing=True`` the table is the upward closure (in cell order) of
    the random cells.
    """
    breaks = [np.sort(rng.normal(0.0, 1.5, size=n_breaks)) for _ in range(n)]
    shape = (n_breaks + 1,) * n
    tab = rng.random(shape) < density
    if increasing:
        for ax in range(n):
            tab = np.logical_or.accumulate(tab, axis=ax)
    return GridSet(breaks, tab, name=f"random-grid(n={n}, breaks={n_breaks}, increasing={increasing})")


def check_increasing(A: FiberSet, n_pairs: int, rng: np.random.Generator) -> bool:
    """Spot check: for sampled x <= y (coordinate-wise) membership of x implies membership of y."""
    X = rng.standard_normal((n_pairs, A.n))
    Y = X + np.abs(rng.standard_normal((n_pairs, A.n))) * (rng.random((n_pairs, A.n)) < 0.7)
    inx = A.contains(X)
    iny = A.contains(Y)
    return bool(np.all(~inx | iny))


class SmoothFunction:
    """A function R^n -> R with optional analytic partial derivatives.

    ``fn`` and each entry of ``grads`` map arrays of shape (m, n) to (m,).
    Missing derivatives are replaced by central differences.
    """

    def __init__(self, n: int, fn: Callable[[np.ndarray], np.ndarray],
                 grads: Sequence[Callable[[np.ndarray], np.ndarray]] | None = None, name: str = "f"):
        self.n = n
        self.fn = fn
        self.grads = list(grads) if grads is not None else None
        self.name = name

    def __call__(self, X) -> np.ndarray:
        return np.asarray(self.fn(_as_points(X, self.n)), dtype=float)

    def partial(self, i: int, X, h: float = 1e-5) -> np.ndarray:
        _check_coord(i, self.n)
        X = _as_points(X, self.n)
        if self.grads is not None:
            return np.asarray(self.grads[i - 1](X), dtype=float)
        e = np.zeros(self.n)
        e[i - 1] = h
        return (self.fn(X + e) - self.fn(X - e)) / (2.0 * h)

    def check_derivatives(self, rng: np.random.Generator, n_points: int = 64, tol: float = 1e-6) -> bool:
        """Compare supplied derivatives with central differences at sampled points."""
        if self.grads is None:
            return True
        X = rng.standard_normal((n_points, self.n))
        h = 1e-5
        for i in range(1, self.n + 1):
            e = np.zeros(self.n)
            e[i - 1] = h
            fd = (self.fn(X + e) - self.fn(X - e)) / (2.0 * h)
            if np.max(np.abs(fd - self.partial(i, X))) > tol:
                return False
        return True

    def describe(self) -> str:
        return self.name


def tanh_coordinate(n: int, i: int = 1, scale: float = 1.0) -> SmoothFunction:
    """x -> tanh(scale * x_i)."""
    def fn(X):
        return np.tanh(scale * X[:, i - 1])

    def zero(X):
        return np.zeros(len(X))

    def d(X):
        return scale * (1.0 - np.tanh(scale * X[:, i - 1]) ** 2)

    grads = [d if j == i else zero for j in range(1, n + 1)]
    return SmoothFunction(n, fn, grads, name=f"tanh(x{i})" if scale == 1.0 else f"tanh({scale:g} x{i})")


def constant_function(n: int, value: float = 1.0) -> SmoothFunction:
    return SmoothFunction(n, lambda X: np.full(len(X), float(value)),
                          [lambda X: np.zeros(len(X))] * n, name=f"const({value:g})")


def linear(n: int, w: Sequence[float]) -> SmoothFunction:
    w = np.asarray(w, dtype=float)
    return SmoothFunction(n, lambda X: X @ w, [(lambda X, c=c: np.full(len(X), c)) for c in w],
                          name=f"linear({w.tolist()})")


def all_cells(shape: Sequence[int]):
    return itertools.product(*(range(s) for s in shape))
