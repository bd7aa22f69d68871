"""Sweeps of the inequality checkers over random instance families, and bound comparisons."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import boolean as B
from .bridge import (DiscreteMeasure, ProductSpaceSet, check_discrete1, check_discrete2,
                     lemma_coupling_check)
from .errors import ConfigError
from .gaussian.checks import (check_alt_bound, check_gaussian_bks, check_gaussian_talagrand,
                              compare_talagrand_bounds, inverse_bks_check)
from .gaussian.sets import (FiberSet, GridSet, HalfSpace, IncreasingSet, Orthant, halfspace,
                            random_grid_set)
from .report import DEGENERATE, EXACT_TOL, InequalityReport

Task = Callable[[], InequalityReport]


@dataclass
class SweepSummary:
    theorem_id: str
    instance_count: int
    min_ratio: float | None
    median_ratio: float | None
    failures: int
    flags: list[str] = field(default_factory=list)
    seed: int | None = None
    reports: list[InequalityReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self, with_reports: bool = True) -> dict:
        out = {"theorem_id": self.theorem_id, "instance_count": self.instance_count,
               "min_ratio": self.min_ratio, "median_ratio": self.median_ratio,
               "failures": self.failures, "flags": list(self.flags), "seed": self.seed}
        if with_reports:
            out["reports"] = [r.to_dict() for r in self.reports]
        return out


# -- failure predicates ---------------------------------------------------------------

def lhs_negative(rep: InequalityReport) -> bool:
    return not rep.lhs_nonnegative()


def identity_broken(rep: InequalityReport) -> bool:
    tol = rep.tolerance if rep.tolerance is not None else EXACT_TOL
    return lhs_negative(rep) or abs(rep.lhs - (rep.rhs0 or 0.0)) > tol


def lower_bound_broken(rep: InequalityReport) -> bool:
    """LHS below RHS_0 beyond tolerance; for inequalities that hold with constant 1."""
    if lhs_negative(rep) or rep.rhs0 is None:
        return lhs_negative(rep)
    if rep.lhs_se or rep.rhs0_se:
        se = math.hypot(rep.lhs_se or 0.0, rep.rhs0_se or 0.0)
        return rep.lhs < rep.rhs0 - 3.0 * se
    return rep.lhs < rep.rhs0 - (rep.tolerance or EXACT_TOL)


# -- instance families --------------------------------------------------------------------

def _random_increasing_cube(rng: np.random.Generator, n: int) -> tuple[B.CubeFunction, str]:
    c = float(rng.uniform(1.0, 6.0))
    s = int(rng.integers(0, 2 ** 32))
    density = c / 2 ** n
    return B.random_increasing(n, density, s), f"random-increasing:{density:.6g}:{s}"


def discrete_talagrand_family(count: int, rng: np.random.Generator, n: int = 10, **_) -> list[Task]:
    """Random increasing pairs: upward closures of points kept with probability c / 2^n, c in [1, 6]."""
    tasks = []
    for _k in range(count):
        A, da = _random_increasing_cube(rng, n)
        Bf, db = _random_increasing_cube(rng, n)
        tasks.append(lambda A=A, Bf=Bf, d=f"{da}|{db}": B.check_talagrand_discrete(A, Bf, instance=d))
    return tasks


def discrete_bks_family(count: int, rng: np.random.Generator, n: int = 8, **_) -> list[Task]:
    etas = (0.1, 0.5, 0.9)
    tasks = []
    for k in range(count):
        f = B.CubeFunction(n, (rng.random(1 << n) < 0.5).astype(float), B.INDICATOR)
        eta = etas[k % 3]
        tasks.append(lambda f=f, eta=eta, k=k: B.check_bks_discrete(f, eta, instance=f"random-set#{k}:eta={eta}"))
    return tasks


def _random_increasing_gaussian(rng: np.random.Generator, n: int) -> FiberSet:
    kind = int(rng.integers(0, 4))
    if kind == 0:
        w = rng.uniform(0.1, 1.0, size=n)
        return HalfSpace(w / np.linalg.norm(w), float(rng.normal(0.0, 1.0)))
    if kind == 1:
        return Orthant(rng.normal(0.0, 0.8, size=n))
    if kind == 2:
        return random_grid_set(n, 2, rng, density=0.3, increasing=True)
    base = Orthant(rng.normal(0.0, 0.8, size=n))
    return IncreasingSet(n, base.threshold, name=f"threshold-oracle({base.describe()})")


def gaussian_pair_family(checker, count: int, rng: np.random.Generator, n_samples: int = 20_000,
                         seed: int = 0, threads: int = 1, **_) -> list[Task]:
    """Increasing pairs mixing half-spaces, orthants, increasing grid sets and bare threshold oracles.

    Pairs of the same closed-form class are computed exactly; mixed pairs and
    threshold oracles go through MC, so both paths are exercised.
    """
    tasks = []
    for k in range(count):
        n = int(rng.integers(1, 4))
        A = _random_increasing_gaussian(rng, n)
        Bs = _random_increasing_gaussian(rng, n)
        d = f"{A.describe()}|{Bs.describe()}"
        tasks.append(lambda A=A, Bs=Bs, d=d, k=k: checker(A, Bs, n_samples, seed + 1000 * k, threads, instance=d))
    return tasks


def inverse_bks_family(count: int, rng: np.random.Generator, **_) -> list[Task]:
    """Equal-weight half-spaces, n in 1..5, rho in {0.2, 0.5, 0.8}, level t in {0, 1}; cycled up to ``count``."""
    grid = [(n, rho, t) for t in (0.0, 1.0) for n in range(1, 6) for rho in (0.2, 0.5, 0.8)]
    return [(lambda n=n, rho=rho, t=t: inverse_bks_check(halfspace(t, n), rho, instance=f"halfspace:{t:g}:{n}:rho={rho}"))
            for n, rho, t in (grid[k % len(grid)] for k in range(count))]


def gaussian_bks_family(count: int, rng: np.random.Generator, n_samples: int = 20_000, seed: int = 0,
                        threads: int = 1, **_) -> list[Task]:
    """Non-monotone grid sets and half-spaces with mixed-sign weights."""
    tasks = []
    rhos = (0.2, 0.5, 0.8)
    for k in range(count):
        rho = rhos[k % 3]
        if k % 2 == 0:
            A: FiberSet = random_grid_set(2, 3, rng)
        else:
            n = int(rng.integers(1, 5))
            A = HalfSpace(rng.normal(size=n), float(rng.normal()))
        tasks.append(lambda A=A, rho=rho, k=k: check_gaussian_bks(A, rho, n_samples, seed + 1000 * k, threads,
                                                                instance=f"{A.describe()}:rho={rho}"))
    return tasks


def _random_product_set(rng: np.random.Generator, q: int, n: int, increasing: bool) -> ProductSpaceSet:
    tab = rng.random((q,) * n) < (0.15 if increasing else 0.5)
    if increasing:
        for ax in range(n):
            tab = np.logical_or.accumulate(tab, axis=ax)
    return ProductSpaceSet(q, n, tab)


def coupling_family(count: int, rng: np.random.Generator, **_) -> list[Task]:
    tasks = []
    for k in range(count):
        n = int(rng.integers(1, 6))
        A = _random_product_set(rng, 2, n, increasing=False)
        alpha = float(rng.uniform(0.05, 0.95))
        rho = float(rng.uniform(0.05, 0.95))
        tasks.append(lambda A=A, alpha=alpha, rho=rho, k=k: lemma_coupling_check(
            A, alpha, rho, instance=f"random-set#{k}:alpha={alpha:.6g}:rho={rho:.6g}"))
    return tasks


def product_space_family(count: int, rng: np.random.Generator, **_) -> list[Task]:
    tasks = []
    for k in range(count):
        q = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        atoms = rng.dirichlet(np.full(q, 2.0))
        atoms = np.maximum(atoms, 0.02)
        gamma = DiscreteMeasure(tuple(atoms / atoms.sum()))
        A = _random_product_set(rng, q, n, increasing=True)
        Bs = _random_product_set(rng, q, n, increasing=True)
        tasks.append(lambda A=A, Bs=Bs, gamma=gamma, k=k: check_discrete1(A, Bs, gamma, instance=f"random-pair#{k}:q={A.q}:n={A.n}"))
    return tasks


def biased_bks_family(count: int, rng: np.random.Generator, **_) -> list[Task]:
    tasks = []
    for k in range(count):
        n = int(rng.integers(1, 7))
        A = _random_product_set(rng, 2, n, increasing=False)
        alpha = float(rng.uniform(0.05, 0.95))
        eta = float(rng.uniform(0.05, 0.95))
        tasks.append(lambda A=A, alpha=alpha, eta=eta, k=k: check_discrete2(
            A, alpha, eta, instance=f"random-set#{k}:alpha={alpha:.6g}:eta={eta:.6g}"))
    return tasks


@dataclass(frozen=True)
class SweepSpec:
    family: Callable[..., list[Task]]
    failed: Callable[[InequalityReport], bool]
    description: str


REGISTRY: dict[str, SweepSpec] = {
    "talagrand_discrete": SweepSpec(discrete_talagrand_family, lhs_negative,
                                    "random increasing pairs on the uniform cube"),
    "bks_discrete": SweepSpec(discrete_bks_family, lhs_negative, "random sets on the uniform cube"),
    "talagrand_gaussian": SweepSpec(lambda count, rng, **kw: gaussian_pair_family(check_gaussian_talagrand, count, rng, **kw),
                                    lhs_negative, "random increasing Gaussian pairs"),
    "alt_bound_gaussian": SweepSpec(lambda count, rng, **kw: gaussian_pair_family(check_alt_bound, count, rng, **kw),
                                    lhs_negative, "random increasing Gaussian pairs"),
    "gaussian_inverse_bks": SweepSpec(inverse_bks_family, lower_bound_broken, "equal-weight half-spaces"),
    "bks_gaussian": SweepSpec(gaussian_bks_family, lhs_negative, "non-monotone grid sets and half-spaces"),
    "coupling_identity": SweepSpec(coupling_family, identity_broken, "random sets on biased cubes"),
    "talagrand_product_space": SweepSpec(product_space_family, lhs_negative, "random increasing pairs in [q]^n"),
    "bks_biased_cube": SweepSpec(biased_bks_family, lhs_negative, "random sets on biased cubes"),
}


def _summarise(theorem_id: str, reports: list[InequalityReport], failed, seed: int | None) -> SweepSummary:
    ratios = [r.ratio for r in reports if r.ratio is not None and math.isfinite(r.ratio)]
    flags = [] if reports else [DEGENERATE]
    return SweepSummary(theorem_id, len(reports),
                        min(ratios) if ratios else None,
                        float(np.median(ratios)) if ratios else None,
                        sum(1 for r in reports if failed(r)), flags, seed, reports)


def run_tasks(tasks: list[Task], threads: int = 1) -> list[InequalityReport]:
    """Evaluate in order; threads only change the speed, results keep task order."""
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda t: t(), tasks))
    return [t() for t in tasks]


def run_sweep(theorem_id: str, count: int, seed: int, n_samples: int = 20_000, threads: int = 1,
              family: Callable[..., list[Task]] | None = None, **params) -> SweepSummary:
    """Run one registered checker over ``count`` instances drawn deterministically from ``seed``."""
    if theorem_id not in REGISTRY:
        raise ConfigError(f"unknown theorem id {theorem_id!r}; known: {', '.join(sorted(REGISTRY))}")
    if count < 0:
        raise ConfigError("count must be nonnegative")
    spec = REGISTRY[theorem_id]
    rng = np.random.default_rng(seed)
    gen = family or spec.family
    tasks = gen(count, rng, n_samples=n_samples, seed=seed, threads=1, **params)
    return _summarise(theorem_id, run_tasks(tasks, threads), spec.failed, seed)


# -- bound comparison -----------------------------------------------------------------------

@dataclass
class BoundComparison:
    lhs: float
    phi_bound: float | None
    alt_bound: float | None
    phi_over_alt: float | None
    dominant: str
    reports: list[InequalityReport]

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "phi_bound": self.phi_bound, "alt_bound": self.alt_bound,
                "phi_over_alt": self.phi_over_alt, "dominant": self.dominant,
                "reports": [r.to_dict() for r in self.reports]}


def compare_bounds(A: FiberSet, Bs: FiberSet, n_samples: int = 200_000, seed: int = 0,
                   threads: int = 1) -> BoundComparison:
    """Both Gaussian correlation lower bounds (constants dropped) and which one is larger."""
    c = compare_talagrand_bounds(A, Bs, n_samples, seed, threads)
    phi, alt = c["phi_bound"], c["alt_bound"]
    if phi is None or alt is None:
        dominant = "undefined"
    elif phi > alt:
        dominant = "phi"
    elif alt > phi:
        dominant = "alt"
    else:
        dominant = "tie"
    return BoundComparison(c["lhs"], phi, alt, c["phi_over_alt"], dominant, [c["talagrand"], c["alt"]])


def one_dimensional_pair_grid(count: int = 50) -> list[tuple[HalfSpace, HalfSpace]]:
    """Half-line pairs (a, inf), (b, inf) with a, b on a fixed grid in [-3, 3]."""
    side = int(math.ceil(math.sqrt(count)))
    levels = np.linspace(-3.0, 3.0, side)
    pairs = [(HalfSpace([1.0], a), HalfSpace([1.0], b)) for a in levels for b in levels]
    return pairs[:count]
