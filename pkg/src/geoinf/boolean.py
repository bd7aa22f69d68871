"""Exact analysis of functions on the discrete cube {-1, 1}^n.

Tables are stored in lexicographic point order: index bits read from most to
least significant are coordinates 1..n, with bit 0 meaning -1 and bit 1 meaning
+1. Reshaping a table to ``(2,) * n`` therefore puts coordinate i on axis i-1.
All operations are exact summations over the 2^n points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import CapacityError, DomainError, PreconditionError
from .report import DEGENERATE, OUTSIDE_PHI, InequalityReport, talagrand_phi

MAX_DIM = 24

INDICATOR = "indicator"
SIGNED_UNIT = "signed_unit"
GENERAL = "general"


@dataclass(frozen=True)
class BiasedMeasure:
    """Product measure with mass ``alpha`` on +1 in every coordinate."""

    alpha: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def weights(self) -> np.ndarray:
        """Per-coordinate weights ordered (-1, +1)."""
        return np.array([1.0 - self.alpha, self.alpha])


UNIFORM = BiasedMeasure(0.5)


def _check_dim(n: int) -> None:
    if not (1 <= n <= MAX_DIM):
        raise CapacityError(f"cube dimension must be in [1, {MAX_DIM}], got {n}")


def cube_points(n: int) -> np.ndarray:
    """All points of {-1,1}^n as a (2^n, n) int array in table order."""
    _check_dim(n)
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class CubeFunction:
    """A real function on {-1,1}^n given by its full value table."""

    n: int
    table: np.ndarray
    range_tag: str = GENERAL

    def __post_init__(self):
        _check_dim(self.n)
        tab = np.asarray(self.table, dtype=float).ravel()
        if tab.size != 1 << self.n:
            raise PreconditionError(f"table has {tab.size} entries, expected 2^{self.n} = {1 << self.n}")
        if self.range_tag == INDICATOR and not np.all((tab == 0.0) | (tab == 1.0)):
            raise PreconditionError("indicator table must take values in {0, 1}")
        if self.range_tag == SIGNED_UNIT and not np.all(np.abs(tab) <= 1.0):
            raise PreconditionError("signed_unit table must take values in [-1, 1]")
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], np.ndarray], range_tag: str = GENERAL):
        """Tabulate ``fn`` applied to the (2^n, n) array of +-1 points."""
        return cls(n, np.asarray(fn(cube_points(n)), dtype=float), range_tag)

    @property
    def tensor(self) -> np.ndarray:
        return self.table.reshape((2,) * self.n)

    def is_indicator(self) -> bool:
        return bool(np.all((self.table == 0.0) | (self.table == 1.0)))

    def __call__(self, x: Iterable[int]) -> float:
        bits = [(v + 1) // 2 for v in x]
        return float(self.tensor[tuple(bits)])

    def permute(self, perm: Iterable[int]) -> "CubeFunction":
        """Relabel coordinates: new coordinate j is old coordinate perm[j-1] (1-based)."""
        axes = [p - 1 for p in perm]
        return CubeFunction(self.n, np.transpose(self.tensor, axes).ravel(), self.range_tag)


# -- named families -----------------------------------------------------------

def constant(n: int, value: float = 1.0) -> CubeFunction:
    tag = INDICATOR if value in (0.0, 1.0) else GENERAL
    return CubeFunction(n, np.full(1 << n, float(value)), tag)


def dictator(n: int = 1, i: int = 1, signed: bool = False) -> CubeFunction:
    pts = cube_points(n)[:, i - 1]
    if signed:
        return CubeFunction(n, pts, SIGNED_UNIT)
    return CubeFunction(n, (pts > 0).astype(float), INDICATOR)


def majority(n: int = 3, signed: bool = False) -> CubeFunction:
    if n % 2 == 0:
        raise DomainError("majority needs an odd number of coordinates")
    s = cube_points(n).sum(axis=1)
    if signed:
        return CubeFunction(n, np.sign(s), SIGNED_UNIT)
    return CubeFunction(n, (s > 0).astype(float), INDICATOR)


def parity(n: int, signed: bool = True) -> CubeFunction:
    p = np.prod(cube_points(n), axis=1)
    if signed:
        return CubeFunction(n, p, SIGNED_UNIT)
    return CubeFunction(n, (p > 0).astype(float), INDICATOR)


def tribes(width: int, count: int) -> CubeFunction:
    """OR of ``count`` disjoint ANDs of ``width`` coordinates each."""
    n = width * count
    pts = cube_points(n).reshape(-1, count, width) > 0
    return CubeFunction(n, np.any(np.all(pts, axis=2), axis=1).astype(float), INDICATOR)


# -- expectations ---------------------------------------------------------------

def _contract(arr: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Integrate out the trailing axes of a (..., 2, 2, ..., 2) array one at a time."""
    while arr.ndim:
        arr = arr @ w
    return arr


def expectation(f: CubeFunction, m: BiasedMeasure = UNIFORM) -> float:
    return float(_contract(f.tensor, m.weights))


def influence(f: CubeFunction, i: int, m: BiasedMeasure = UNIFORM) -> float:
    """E_m |f(X) - f(X^[i])| where X^[i] flips coordinate i.

    The two points of a flip pair carry total weight equal to the marginal
    weight of the remaining coordinates, so the sum reduces to the edge sum
    E_{x^(-i)} |f(x, x_i=+1) - f(x, x_i=-1)|.
    """
    if not (1 <= i <= f.n):
        raise DomainError(f"coordinate {i} out of range 1..{f.n}")
    t = f.tensor
    d = np.abs(np.take(t, 1, axis=i - 1) - np.take(t, 0, axis=i - 1))
    return float(_contract(d, m.weights)) if d.ndim else float(d)


def influences(f: CubeFunction, m: BiasedMeasure = UNIFORM) -> np.ndarray:
    return np.array([influence(f, i, m) for i in range(1, f.n + 1)])


@dataclass(frozen=True)
class FourierExpansion:
    """Walsh coefficients laid out like the cube table: bit for coordinate i set iff i in S."""

    n: int
    coefficients: np.ndarray

    def index(self, subset: Iterable[int]) -> int:
        idx = 0
        for i in subset:
            if not (1 <= i <= self.n):
                raise DomainError(f"coordinate {i} out of range 1..{self.n}")
            idx |= 1 << (self.n - i)
        return idx

    def __getitem__(self, subset: Iterable[int]) -> float:
        return float(self.coefficients[self.index(subset)])

    def degrees(self) -> np.ndarray:
        """|S| for every coefficient position."""
        idx = np.arange(1 << self.n)
        return np.array([bin(v).count("1") for v in idx])

    def as_dict(self, tol: float = 0.0) -> dict[tuple[int, ...], float]:
        out = {}
        for idx, c in enumerate(self.coefficients):
            if abs(c) > tol:
                s = tuple(i for i in range(1, self.n + 1) if idx >> (self.n - i) & 1)
                out[s] = float(c)
        return out

    def parseval(self) -> float:
        return float(np.sum(self.coefficients ** 2))


def fourier(f: CubeFunction) -> FourierExpansion:
    """Fast Walsh-Hadamard transform, O(n 2^n): f_hat(S) = E[f chi_S] under the uniform measure."""
    t = f.tensor.copy()
    for ax in range(f.n):
        a0 = np.take(t, 0, axis=ax)
        a1 = np.take(t, 1, axis=ax)
        t = np.stack([(a0 + a1) / 2.0, (a1 - a0) / 2.0], axis=ax)
    return FourierExpansion(f.n, t.ravel())


# -- noise ------------------------------------------------------------------------

def _check_eta(eta: float) -> None:
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta must lie in (0, 1), got {eta}")


def noise_operator(f: CubeFunction, eta: float, m: BiasedMeasure = UNIFORM) -> np.ndarray:
    """Table of x -> E[f(X^eta) | X = x], where each coordinate is resampled from m with probability eta."""
    _check_eta(eta)
    t = f.tensor
    w = m.weights
    for ax in range(f.n):
        mean = np.tensordot(t, w, axes=([ax], [0]))
        t = (1.0 - eta) * t + eta * np.expand_dims(mean, ax)
    return t.ravel()


def noise_stability(f: CubeFunction, eta: float, m: BiasedMeasure = UNIFORM) -> float:
    """Z(f, eta) = E[f(X) f(X^eta)]."""
    tf = noise_operator(f, eta, m)
    return float(_contract((f.table * tf).reshape((2,) * f.n), m.weights))


def noise_var(f: CubeFunction, eta: float, m: BiasedMeasure = UNIFORM) -> float:
    """VAR(f, eta) = Z(f, eta) - E[f]^2, exact."""
    return noise_stability(f, eta, m) - expectation(f, m) ** 2


def noise_var_fourier(f: CubeFunction, eta: float) -> float:
    """Uniform-measure VAR(f, eta) as sum over S != {} of f_hat(S)^2 (1-eta)^|S|."""
    _check_eta(eta)
    fe = fourier(f)
    deg = fe.degrees()
    c2 = fe.coefficients ** 2
    return float(np.sum(c2[deg > 0] * (1.0 - eta) ** deg[deg > 0]))


# -- monotone sets ----------------------------------------------------------------

def is_monotone(f: CubeFunction) -> bool:
    """True iff f is coordinate-wise nondecreasing; checks all n 2^(n-1) covering edges."""
    t = f.tensor
    return all(bool(np.all(np.take(t, 1, axis=ax) >= np.take(t, 0, axis=ax))) for ax in range(f.n))


def upward_closure(mask: np.ndarray, n: int) -> np.ndarray:
    """Smallest increasing set containing ``mask``, propagated along covering edges axis by axis."""
    t = np.asarray(mask, dtype=bool).reshape((2,) * n).copy()
    for ax in range(n):
        lo = np.take(t, 0, axis=ax)
        hi = np.take(t, 1, axis=ax)
        t = np.stack([lo, hi | lo], axis=ax)
    return t.ravel()


def random_increasing(n: int, density: float, seed: int) -> CubeFunction:
    """Upward closure of points drawn independently with probability ``density``.

    Points are visited in table order, one uniform draw each; the minimal
    elements of the closure form the random antichain.
    """
    _check_dim(n)
    if not (0.0 <= density <= 1.0):
        raise DomainError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    picked = rng.random(1 << n) < density
    out = CubeFunction(n, upward_closure(picked, n).astype(float), INDICATOR)
    assert is_monotone(out)
    return out


def _require_increasing_indicator(f: CubeFunction, name: str) -> None:
    if not f.is_indicator():
        raise PreconditionError(f"{name} must be an indicator")
    if not is_monotone(f):
        raise PreconditionError(f"{name} must be increasing")


def check_talagrand_discrete(A: CubeFunction, B: CubeFunction, m: BiasedMeasure = UNIFORM,
                             instance: str = "") -> InequalityReport:
    """Correlation of two increasing sets against phi(sum_i I_i(A) I_i(B))."""
    if A.n != B.n:
        raise PreconditionError("sets live in different dimensions")
    _require_increasing_indicator(A, "A")
    _require_increasing_indicator(B, "B")
    lhs = expectation(CubeFunction(A.n, A.table * B.table), m) - expectation(A, m) * expectation(B, m)
    arg = float(np.dot(influences(A, m), influences(B, m)))
    flags = []
    rhs0: float | None
    if arg <= 0.0:
        rhs0, flags = 0.0, [DEGENERATE]
    elif arg > 1.0:
        rhs0, flags = None, [OUTSIDE_PHI]
    else:
        rhs0 = talagrand_phi(arg)
    return InequalityReport("talagrand_discrete", lhs, rhs0, flags=flags, instance_descriptor=instance,
                            methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-12,
                            details={"arg": arg, "alpha": m.alpha})


def check_bks_discrete(f: CubeFunction, eta: float, m: BiasedMeasure = UNIFORM,
                       instance: str = "") -> InequalityReport:
    """VAR(f, eta) against the influence sum S = sum_i I_i(f)^2.

    The report's ``exponent`` is log(VAR) / (eta log S): the largest c2 for which
    VAR <= S^(c2 eta) with c1 = 1.
    """
    if np.any(f.table < 0.0) or np.any(f.table > 1.0):
        raise PreconditionError("f must take values in [0, 1]")
    lhs = noise_var(f, eta, m)
    s = float(np.sum(influences(f, m) ** 2))
    details = {"S": s, "eta": eta, "alpha": m.alpha}
    if 0.0 < s < 1.0 and lhs > 0.0:
        details["exponent"] = math.log(lhs) / (eta * math.log(s))
    return InequalityReport("bks_discrete", lhs, s, ratio=None if s <= 0 else lhs / s,
                            instance_descriptor=instance, methods={"lhs": "exact", "rhs0": "exact"},
                            tolerance=1e-12, details=details)
