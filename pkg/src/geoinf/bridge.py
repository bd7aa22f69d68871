"""Reductions between the cube, finite product spaces and Gaussian space.

* the CLT lift of a Gaussian function to a cube function on n*m bits,
* the quantile map sending Gaussian space onto a finite product space,
* h-influences and the correspondence between discrete and Gaussian noise levels.

Symbols of [q] are 1..q; tables of product-space sets have shape (q,) * n
with symbol k of coordinate i at index k-1 of axis i-1. For q = 2 this is the
cube table layout, symbol 1 being -1 (mass 1 - alpha) and symbol 2 being +1
(mass alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .boolean import INDICATOR, MAX_DIM, BiasedMeasure, CubeFunction, cube_points, influence
from .boolean import noise_var as cube_noise_var
from .errors import CapacityError, DomainError, PreconditionError
from .gaussian.functionals import geometric_influence
from .gaussian.ou import gaussian_expectation
from .gaussian.sets import GridSet, SmoothFunction
from .numerics import binormal_cdf, gauss_hermite, normal_pdf, normal_quantile
from .report import DEGENERATE, MC_PATH, OUTSIDE_PHI, InequalityReport, talagrand_phi

MAX_SYMMETRIC_M = 1 << 16


# -- discrete measures and sets -------------------------------------------------------

@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure on [q] with strictly positive atoms."""

    atoms: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        if a.ndim != 1 or len(a) < 2:
            raise DomainError("a discrete measure needs at least two atoms")
        if np.any(a <= 0.0):
            raise DomainError("all atoms must be strictly positive")
        if abs(a.sum() - 1.0) > 1e-12:
            raise DomainError(f"atoms must sum to 1, got {a.sum()}")
        object.__setattr__(self, "atoms", tuple(float(v) for v in a))

    @classmethod
    def uniform(cls, q: int) -> "DiscreteMeasure":
        return cls(tuple([1.0 / q] * q))

    @classmethod
    def biased(cls, alpha: float) -> "DiscreteMeasure":
        """Two symbols: -1 with mass 1 - alpha, then +1 with mass alpha."""
        if not (0.0 < alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
        return cls((1.0 - alpha, alpha))

    @property
    def q(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.atoms)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.atoms)

    @property
    def alpha(self) -> float:
        """Smallest atom."""
        return min(self.atoms)


@dataclass(frozen=True, eq=False)
class ProductSpaceSet:
    """Indicator table of a subset of [q]^n."""

    q: int
    n: int
    table: np.ndarray

    def __post_init__(self):
        if self.q < 2 or self.n < 1:
            raise DomainError("need q >= 2 and n >= 1")
        if self.n * math.log2(self.q) > MAX_DIM + 1e-9:
            raise CapacityError(f"q^n = {self.q}^{self.n} exceeds 2^{MAX_DIM}")
        tab = np.asarray(self.table)
        if tab.size != self.q ** self.n:
            raise PreconditionError(f"table has {tab.size} entries, expected {self.q ** self.n}")
        tab = tab.astype(float).reshape((self.q,) * self.n)
        if not np.all((tab == 0.0) | (tab == 1.0)):
            raise PreconditionError("set tables take values in {0, 1}")
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)

    @classmethod
    def from_cube(cls, f: CubeFunction) -> "ProductSpaceSet":
        return cls(2, f.n, f.tensor)

    @classmethod
    def from_predicate(cls, q: int, n: int, pred: Callable[[np.ndarray], np.ndarray]) -> "ProductSpaceSet":
        """Tabulate ``pred`` on the (q^n, n) array of symbol vectors (entries 1..q)."""
        grids = np.meshgrid(*([np.arange(1, q + 1)] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return cls(q, n, np.asarray(pred(pts), dtype=float))

    @classmethod
    def full(cls, q: int, n: int) -> "ProductSpaceSet":
        return cls(q, n, np.ones((q,) * n))

    def to_cube(self) -> CubeFunction:
        if self.q != 2:
            raise PreconditionError("only q = 2 sets are cube functions")
        return CubeFunction(self.n, self.table.ravel(), INDICATOR)

    def is_increasing(self) -> bool:
        return all(bool(np.all(np.diff(self.table, axis=ax) >= 0)) for ax in range(self.n))


def _check_gamma(A: ProductSpaceSet, gamma: DiscreteMeasure) -> None:
    if gamma.q != A.q:
        raise DomainError(f"measure has {gamma.q} atoms but the set lives on [{A.q}]^n")


def _integrate(arr: np.ndarray, w: np.ndarray) -> float:
    while arr.ndim:
        arr = arr @ w
    return float(arr)


def product_measure(A: ProductSpaceSet, gamma: DiscreteMeasure) -> float:
    _check_gamma(A, gamma)
    return _integrate(A.table, gamma.weights)


# -- h-functions and h-influences ------------------------------------------------------

def _gaussian_isoperimetric(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    inner = (t > 0.0) & (t < 1.0)
    if np.any(inner):
        out[inner] = normal_pdf(normal_quantile(t[inner]))
    return out


@dataclass(frozen=True)
class HFunction:
    """A profile h: [0, 1] -> [0, 1] applied to fiber masses."""

    tag: str
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False)

    def __call__(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    @classmethod
    def gaussian_isoperimetric(cls) -> "HFunction":
        """h(t) = phi(Phi^{-1}(t)), zero at the endpoints."""
        return cls("gaussian_isoperimetric", _gaussian_isoperimetric)

    @classmethod
    def variance(cls) -> "HFunction":
        return cls("variance", lambda t: t * (1.0 - t))

    @classmethod
    def bkkkl(cls) -> "HFunction":
        """1 on (0, 1), 0 at the endpoints: the probability the fiber is non-constant."""
        return cls("bkkkl", lambda t: ((t > 0.0) & (t < 1.0)).astype(float))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray]) -> "HFunction":
        return cls("custom", fn)


def fiber_masses(A: ProductSpaceSet, i: int, gamma: DiscreteMeasure) -> np.ndarray:
    """gamma-mass of the coordinate-i fiber over each x^(-i), shape (q,) * (n-1)."""
    _check_gamma(A, gamma)
    if not (1 <= i <= A.n):
        raise DomainError(f"coordinate {i} out of range 1..{A.n}")
    return np.tensordot(A.table, gamma.weights, axes=([i - 1], [0]))


def h_influence(A: ProductSpaceSet, i: int, gamma: DiscreteMeasure, h: HFunction | None = None) -> float:
    """E_gamma[h(gamma(fiber))] summed exactly over the q^(n-1) fibers."""
    h = h or HFunction.gaussian_isoperimetric()
    return _integrate(h(fiber_masses(A, i, gamma)), gamma.weights)


def h_influences(A: ProductSpaceSet, gamma: DiscreteMeasure, h: HFunction | None = None) -> np.ndarray:
    return np.array([h_influence(A, i, gamma, h) for i in range(1, A.n + 1)])


# -- quantile map and lifted sets -------------------------------------------------------

@dataclass(frozen=True)
class QuantileMap:
    """psi(u) = 1 + #{j : tau_j <= u}: monotone transport of N(0, 1) onto gamma."""

    gamma: DiscreteMeasure
    thresholds: np.ndarray

    def __call__(self, u) -> np.ndarray:
        return 1 + np.searchsorted(self.thresholds, np.asarray(u, dtype=float), side="right")

    def cell(self, k: int) -> tuple[float, float]:
        edges = np.concatenate([[-math.inf], self.thresholds, [math.inf]])
        return float(edges[k - 1]), float(edges[k])


def quantile_map(gamma: DiscreteMeasure) -> QuantileMap:
    """tau_j = Phi^{-1}(F(j)) for j = 1..q-1."""
    F = gamma.cumulative[:-1]
    tau = np.asarray(normal_quantile(np.clip(F, 0.0, 1.0 - 1e-16)), dtype=float).reshape(-1)
    if np.any(np.diff(tau) <= 0):
        raise DomainError("atoms are too small to separate their Gaussian quantiles")
    return QuantileMap(gamma, tau)


def lift_set(A: ProductSpaceSet, gamma: DiscreteMeasure) -> GridSet:
    """(psi^n)^{-1}(A): a grid set whose cells are the quantile cells of each coordinate."""
    _check_gamma(A, gamma)
    tau = quantile_map(gamma).thresholds
    return GridSet([tau] * A.n, A.table.astype(bool), name=f"lift(q={A.q}, n={A.n})")


# -- CLT lift ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricLift:
    """One-block CLT lift kept implicitly: the value depends only on the number k of +1 bits."""

    m: int
    values: np.ndarray  # values[k] = f((2k - m) / sqrt(m)), k = 0..m

    def influence(self) -> float:
        """Uniform-measure influence of any bit: sum over k ~ Bin(m-1, 1/2) of |f(k+1) - f(k)|."""
        w = stats.binom.pmf(np.arange(self.m), self.m - 1, 0.5)
        return float(w @ np.abs(np.diff(self.values)))

    def expectation(self) -> float:
        w = stats.binom.pmf(np.arange(self.m + 1), self.m, 0.5)
        return float(w @ self.values)


def clt_lift(f: SmoothFunction, m: int):
    """Cube function on n*m bits, x -> f(s_1, ..., s_n) with s_i the normalised sum of block i.

    Block i occupies bits (i-1)m+1 .. im. Tables are materialised for n*m <= 24;
    a one-dimensional f with larger m gets a :class:`SymmetricLift` instead.
    """
    if m < 1:
        raise DomainError("replication count must be positive")
    n = f.n
    if n * m <= MAX_DIM:
        def fn(pts):
            s = pts.reshape(len(pts), n, m).sum(axis=2) / math.sqrt(m)
            return f(s)
        return CubeFunction.from_callable(n * m, fn)
    if n == 1 and m <= MAX_SYMMETRIC_M:
        k = np.arange(m + 1)
        return SymmetricLift(m, f(((2 * k - m) / math.sqrt(m))[:, None]))
    raise CapacityError(f"cannot materialise a lift on {n * m} bits")


def lifted_influence(f: SmoothFunction, i: int, m: int) -> float:
    """I_{i1} of the CLT lift under the uniform measure (first bit of block i)."""
    lift = clt_lift(f, m)
    if isinstance(lift, SymmetricLift):
        return lift.influence()
    return influence(lift, (i - 1) * m + 1)


def clt_influence_limit(f: SmoothFunction, i: int, m_list: Sequence[int], rule_nodes: int = 200) -> list[dict]:
    """sqrt(m) I_{i1}(lift) for each m, next to the limit 2 E|d_i f| (Gauss-Hermite)."""
    target = 2.0 * gaussian_expectation(lambda Y: np.abs(f.partial(i, Y)), f.n,
                                        gauss_hermite(rule_nodes if f.n == 1 else 40))
    rows = []
    for m in m_list:
        val = math.sqrt(m) * lifted_influence(f, i, m)
        rel = abs(val - target) / target if target else abs(val)
        rows.append({"m": int(m), "scaled_influence": val, "target": target, "rel_error": rel})
    return rows


# -- noise levels -----------------------------------------------------------------------

def _check_unit(name: str, v: float) -> None:
    if not (0.0 < v < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {v}")


def eta_from_rho(rho: float, alpha: float) -> float:
    """P[W_1 < a, W_1^rho > a] / (alpha (1 - alpha)) with a = Phi^{-1}(alpha)."""
    _check_unit("rho", rho)
    _check_unit("alpha", alpha)
    a = float(normal_quantile(alpha))
    r = math.sqrt(1.0 - rho * rho)
    return (alpha - binormal_cdf(a, a, r)) / (alpha * (1.0 - alpha))


def _eta_unchecked(rho: float, alpha: float) -> float:
    if rho <= 0.0:
        return 0.0
    if rho >= 1.0:
        return 1.0
    return eta_from_rho(rho, alpha)


def rho_from_eta(eta: float, alpha: float) -> float:
    """Inverse of :func:`eta_from_rho` in rho by bracketed root finding."""
    _check_unit("eta", eta)
    _check_unit("alpha", alpha)
    return float(optimize.brentq(lambda r: _eta_unchecked(r, alpha) - eta, 0.0, 1.0,
                                 xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


# -- checks -----------------------------------------------------------------------------

def lemma_coupling_check(A: ProductSpaceSet, alpha: float, rho: float, instance: str = "") -> InequalityReport:
    """Discrete VAR(A, eta(rho, alpha)) under nu_alpha against VAR^G(lift(A), rho), both exact."""
    if A.q != 2:
        raise PreconditionError("the coupling identity is stated for q = 2")
    eta = eta_from_rho(rho, alpha)
    gamma = DiscreteMeasure.biased(alpha)
    disc = cube_noise_var(A.to_cube(), eta, BiasedMeasure(alpha))
    G = lift_set(A, gamma)
    gauss = G.exact_noise_stability(rho) - G.exact_measure() ** 2
    return InequalityReport("coupling_identity", lhs=disc, rhs0=gauss, instance_descriptor=instance,
                            methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-8,
                            details={"alpha": alpha, "rho": rho, "eta": eta,
                                     "abs_discrepancy": abs(disc - gauss)})


def _log_term(ia: float, ib: float) -> float:
    if ia <= 0.0 or ib <= 0.0:
        return 0.0
    return ia * ib / math.sqrt(math.log(1.0 / ia) * math.log(1.0 / ib))


def check_discrete1(A: ProductSpaceSet, B: ProductSpaceSet, gamma: DiscreteMeasure,
                    instance: str = "") -> InequalityReport:
    """Correlation of increasing A, B in [q]^n against max(log-corrected h-influence sum, phi(sum))."""
    for name, S in (("A", A), ("B", B)):
        _check_gamma(S, gamma)
        if not S.is_increasing():
            raise PreconditionError(f"{name} must be increasing")
    if A.n != B.n:
        raise PreconditionError("sets live in different dimensions")
    w = gamma.weights
    lhs = _integrate(A.table * B.table, w) - _integrate(A.table, w) * _integrate(B.table, w)
    ia = h_influences(A, gamma)
    ib = h_influences(B, gamma)
    log_branch = float(sum(_log_term(a, b) for a, b in zip(ia, ib)))
    arg = float(ia @ ib)
    flags: list[str] = []
    phi_branch: float | None
    if arg <= 0.0:
        phi_branch = 0.0
    elif arg > 1.0:
        phi_branch = None
        flags.append(OUTSIDE_PHI)
    else:
        phi_branch = talagrand_phi(arg)
    rhs0 = max(log_branch, phi_branch or 0.0)
    if rhs0 <= 0.0:
        flags.append(DEGENERATE)
    details = {"arg": arg, "log_branch": log_branch, "phi_branch": phi_branch,
               "h_influences_A": ia.tolist(), "h_influences_B": ib.tolist(),
               "ratio_log_branch": lhs / log_branch if log_branch > 0 else None,
               "ratio_phi_branch": lhs / phi_branch if phi_branch else None}
    return InequalityReport("talagrand_product_space", lhs, rhs0, flags=flags, instance_descriptor=instance,
                            methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-12, details=details)


def check_discrete2(A: ProductSpaceSet, alpha: float, eta: float, instance: str = "") -> InequalityReport:
    """VAR(A, eta) under nu_alpha against S = sum_i I^h_i(A)^2 and rho = rho(eta, alpha)."""
    if A.q != 2:
        raise PreconditionError("the biased-cube BKS check needs q = 2")
    lhs = cube_noise_var(A.to_cube(), eta, BiasedMeasure(alpha))
    rho = rho_from_eta(eta, alpha)
    s = float(np.sum(h_influences(A, DiscreteMeasure.biased(alpha)) ** 2))
    details = {"alpha": alpha, "eta": eta, "rho": rho, "S": s}
    if 0.0 < s < 1.0 and lhs > 0.0:
        details["exponent"] = math.log(lhs) / (rho * rho * math.log(s))
    return InequalityReport("bks_biased_cube", lhs, s, instance_descriptor=instance,
                            methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-12, details=details)


def influence_relation_checks(A: ProductSpaceSet, gamma: DiscreteMeasure, n_samples: int = 0,
                              seed: int = 0, instance: str = "") -> list[InequalityReport]:
    """Per coordinate: the q=2 proportionality I^h = h(alpha) I, the variance-influence bound,
    and I^G of the lifted set against I^h (equal for increasing A).

    ``lhs`` and ``rhs0`` of each report are the two sides of one relation; ``ratio`` is lhs / rhs0.
    With ``n_samples`` > 0 the lifted influence is also estimated by MC (seed + i).
    """
    _check_gamma(A, gamma)
    h = HFunction.gaussian_isoperimetric()
    alpha = gamma.alpha
    lifted = lift_set(A, gamma)
    increasing = A.is_increasing()
    out = []
    for i in range(1, A.n + 1):
        ih = h_influence(A, i, gamma, h)
        tag = f"{instance}[i={i}]"
        if A.q == 2:
            top = gamma.atoms[1]
            I = influence(A.to_cube(), i, BiasedMeasure(top))
            const = float(h(np.array([top]))[0])
            log_const = alpha * math.sqrt(math.log(1.0 / alpha))
            out.append(InequalityReport(
                "h_influence_proportionality", ih, const * I, instance_descriptor=tag,
                methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-12,
                details={"influence": I, "h_alpha": const, "log_constant": log_const,
                         "h_alpha_over_log_constant": const / log_const if log_const > 0 else None}))
        ivar = h_influence(A, i, gamma, HFunction.variance())
        if alpha <= 0.5:
            out.append(InequalityReport(
                "h_influence_variance_bound", 2.0 * math.sqrt(math.log(1.0 / alpha)) * ivar, ih,
                instance_descriptor=tag, methods={"lhs": "exact", "rhs0": "exact"}, tolerance=1e-12,
                details={"variance_influence": ivar}))
        ig = lifted.exact_influence(i)
        details = {"increasing": increasing, "equality_expected": increasing,
                   "abs_gap": abs(ig - ih)}
        flags: list[str] = []
        methods = {"lhs": "exact", "rhs0": "exact"}
        if n_samples:
            est = geometric_influence(lifted, i, n_samples, seed + i)
            details["mc_lifted_influence"] = est.value
            details["mc_lifted_influence_se"] = est.std_error
            flags.append(MC_PATH)
        out.append(InequalityReport(
            "lifted_influence_bound", ig, ih, flags=flags, instance_descriptor=tag,
            seed=seed if n_samples else None, n_samples=n_samples or None,
            methods=methods, tolerance=1e-12, details=details))
    return out
