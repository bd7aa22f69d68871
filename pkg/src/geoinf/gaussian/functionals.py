"""Geometric influences, Gaussian noise sensitivity and intersection measures."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from ..numerics import Estimate, mc_expect, mc_moments
from .sets import FiberSet, IncreasingSet, SmoothFunction, exact_intersection_measure


def _check_rho(rho: float) -> None:
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0, 1), got {rho}")


def geometric_influence(A: FiberSet, i: int, n_samples: int, seed: int, threads: int = 1) -> Estimate:
    """MC mean of the Minkowski content of the fiber of A in coordinate i."""
    def sampler(rng, size):
        return A.fiber_content(i, rng.standard_normal((size, A.n)))

    return mc_expect(sampler, n_samples, seed, threads)


def geometric_influence_increasing(A, i: int, n_samples: int, seed: int, threads: int = 1) -> Estimate:
    """MC mean of phi(t_i(A; x)) for an increasing set given by thresholds."""
    from ..numerics import normal_pdf

    def sampler(rng, size):
        return normal_pdf(A.threshold(i, rng.standard_normal((size, A.n))))

    return mc_expect(sampler, n_samples, seed, threads)


def geometric_influences(A: FiberSet, n_samples: int, seed: int, threads: int = 1) -> list[Estimate]:
    """All n influences; exact where the set has a closed form, MC with seed + i otherwise."""
    out = []
    for i in range(1, A.n + 1):
        v = A.exact_influence(i)
        if v is not None:
            out.append(Estimate(v, 0.0, 0, None))
        elif hasattr(A, "threshold") and A.is_increasing():
            out.append(geometric_influence_increasing(A, i, n_samples, seed + i, threads))
        else:
            out.append(geometric_influence(A, i, n_samples, seed + i, threads))
    return out


def _evaluator(f):
    if isinstance(f, FiberSet):
        return lambda X: f.contains(X).astype(float)
    if isinstance(f, SmoothFunction):
        return f
    raise DomainError("expected a FiberSet or SmoothFunction")


def correlated_pair(rng: np.random.Generator, size: int, n: int, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """(W, sqrt(1 - rho^2) W + rho W')."""
    W = rng.standard_normal((size, n))
    Wp = rng.standard_normal((size, n))
    return W, math.sqrt(1.0 - rho * rho) * W + rho * Wp


def gaussian_noise_var(f, rho: float, n_samples: int, seed: int, threads: int = 1) -> Estimate:
    """MC estimate of E[f(W) f(W^rho)] - E[f(W)]^2 with common random numbers.

    Both f(W) and f(W^rho) are unbiased for E f, so their average serves as the
    mean estimate; the delta method supplies the standard error.
    """
    _check_rho(rho)
    ev = _evaluator(f)

    def sampler(rng, size):
        W, Wr = correlated_pair(rng, size, f.n, rho)
        a, b = ev(W), ev(Wr)
        return np.stack([a * b, 0.5 * (a + b)], axis=1)

    mom = mc_moments(sampler, n_samples, seed, threads)
    z, m = mom.mean
    return mom.delta(z - m * m, [1.0, -2.0 * m])


def exact_noise_var(A: FiberSet, rho: float) -> float | None:
    _check_rho(rho)
    z = A.exact_noise_stability(rho)
    mu = A.exact_measure()
    if z is None or mu is None:
        return None
    return z - mu * mu


def noise_var(A: FiberSet, rho: float, n_samples: int, seed: int, threads: int = 1) -> tuple[Estimate, str]:
    """VAR^G(A, rho), exact when available; returns (estimate, method tag)."""
    v = exact_noise_var(A, rho)
    if v is not None:
        return Estimate(v, 0.0, 0, None), "exact"
    return gaussian_noise_var(A, rho, n_samples, seed, threads), "mc"


def noise_stability(A: FiberSet, rho: float, n_samples: int, seed: int, threads: int = 1) -> tuple[Estimate, str]:
    """Z^G(A, rho) = P[W in A, W^rho in A]."""
    _check_rho(rho)
    z = A.exact_noise_stability(rho)
    if z is not None:
        return Estimate(z, 0.0, 0, None), "exact"

    def sampler(rng, size):
        W, Wr = correlated_pair(rng, size, A.n, rho)
        return (A.contains(W) & A.contains(Wr)).astype(float)

    return mc_expect(sampler, n_samples, seed, threads), "mc"


def covariance(A: FiberSet, B: FiberSet, n_samples: int, seed: int, threads: int = 1) -> tuple[Estimate, str]:
    """mu(A n B) - mu(A) mu(B); exact for pairs of half-spaces, orthants or grid sets."""
    if A.n != B.n:
        raise DomainError("sets live in different dimensions")
    inter = exact_intersection_measure(A, B)
    ma, mb = A.exact_measure(), B.exact_measure()
    if inter is not None and ma is not None and mb is not None:
        return Estimate(inter - ma * mb, 0.0, 0, None), "exact"

    def sampler(rng, size):
        X = rng.standard_normal((size, A.n))
        a = A.contains(X).astype(float)
        b = B.contains(X).astype(float)
        return np.stack([a * b, a, b], axis=1)

    mom = mc_moments(sampler, n_samples, seed, threads)
    ab, a, b = mom.mean
    return mom.delta(ab - a * b, [1.0, -b, -a]), "mc"


def measure(A: FiberSet, n_samples: int, seed: int, threads: int = 1) -> tuple[Estimate, str]:
    v = A.exact_measure()
    if v is not None:
        return Estimate(v, 0.0, 0, None), "exact"
    return mc_expect(lambda rng, size: A.contains(rng.standard_normal((size, A.n))).astype(float),
                     n_samples, seed, threads), "mc"


def increasing_view(A) -> IncreasingSet:
    """The threshold-oracle view of a set that exposes ``threshold``."""
    return IncreasingSet(A.n, A.threshold, name=A.describe())
