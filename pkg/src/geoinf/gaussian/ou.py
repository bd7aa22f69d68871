"""Ornstein-Uhlenbeck semigroup: evaluation, derivatives and the covariance identity."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from ..errors import DomainError
from ..numerics import (Estimate, QuadratureRule, gauss_hermite, gauss_legendre, mc_expect,
                        normal_cdf, normal_pdf, tensor_grid)
from ..report import InequalityReport
from .sets import FiberSet, GridSet, HalfSpace, Orthant, SmoothFunction, _as_points

QUADRATURE_MAX_DIM = 3


def _check_t(t: float) -> None:
    if not (t > 0.0):
        raise DomainError(f"OU time must be positive, got {t}")


def ou_time_from_rho(rho: float) -> float:
    """The t with e^{-t} = sqrt(1 - rho^2), so E[f P_t f] = Z^G(f, rho)."""
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return -0.5 * math.log1p(-rho * rho)


def ou_scales(t: float) -> tuple[float, float]:
    """(e^{-t}, sqrt(1 - e^{-2t}))."""
    _check_t(t)
    return math.exp(-t), math.sqrt(-math.expm1(-2.0 * t))


def ou_apply(f, t: float, x, rule: QuadratureRule | None = None,
             n_samples: int = 200_000, seed: int = 0) -> np.ndarray:
    """P_t f at the points ``x`` (shape (n,) or (m, n)).

    Smooth functions use a tensor Gauss-Hermite rule for n <= 3 and MC above.
    Half-spaces, orthants and grid sets are evaluated in closed form. For any
    other FiberSet the integral over coordinate 1 is done exactly through the
    fiber, and the remaining coordinates by Gauss-Hermite (n <= 3) or MC; that
    route is only as accurate as quadrature of a discontinuous integrand.
    """
    a, s = ou_scales(t)
    X = _as_points(x, f.n)
    n = f.n
    if isinstance(f, FiberSet):
        exact = _ou_apply_closed_form(f, a, s, X)
        if exact is not None:
            return exact
        return _ou_apply_set(f, a, s, X, rule, n_samples, seed)
    if n <= QUADRATURE_MAX_DIM:
        rule = rule or gauss_hermite(40 if n == 1 else 24 if n == 2 else 14)
        Y, w = tensor_grid(rule, n)
        pts = a * X[:, None, :] + s * Y[None, :, :]
        vals = f(pts.reshape(-1, n)).reshape(len(X), len(w))
        return vals @ w
    out = np.empty(len(X))
    for k, x0 in enumerate(X):
        out[k] = mc_expect(lambda rng, size: f(a * x0 + s * rng.standard_normal((size, n))),
                           n_samples, seed).value
    return out


def _ou_apply_closed_form(A: FiberSet, a: float, s: float, X: np.ndarray) -> np.ndarray | None:
    """P_t 1_A for sets whose Gaussian cell probabilities factor over coordinates."""
    if isinstance(A, HalfSpace):
        norm = float(np.linalg.norm(A.w))
        return normal_cdf((a * (X @ A.w) - A.c) / (s * norm))
    if isinstance(A, Orthant):
        return np.prod(normal_cdf((a * X - A.a) / s), axis=1)
    if isinstance(A, GridSet):
        table = A.table.astype(float)
        out = np.empty(len(X))
        for k, x0 in enumerate(X):
            r = table
            for j, b in enumerate(A.breaks):
                edges = np.concatenate([[-math.inf], b, [math.inf]])
                p = np.diff(normal_cdf((edges - a * x0[j]) / s))
                r = np.tensordot(p, r, axes=(0, 0))
            out[k] = float(r)
        return out
    return None


def _ou_apply_set(A: FiberSet, a: float, s: float, X: np.ndarray, rule, n_samples: int, seed: int):
    n = A.n
    if n == 1:
        return np.array([A.fiber(1, np.zeros(1)).affine_mass(a * x[0], s) for x in X])
    if n - 1 <= QUADRATURE_MAX_DIM:
        rule = rule or gauss_hermite(40 if n == 2 else 20)
        Y, w = tensor_grid(rule, n - 1)
    out = np.empty(len(X))
    for k, x0 in enumerate(X):
        if n - 1 <= QUADRATURE_MAX_DIM:
            P = np.zeros((len(w), n))
            P[:, 1:] = a * x0[1:] + s * Y
            masses = np.array([A.fiber(1, p).affine_mass(a * x0[0], s) for p in P])
            out[k] = masses @ w
        else:
            def sampler(rng, size, x0=x0):
                P = np.zeros((size, n))
                P[:, 1:] = a * x0[1:] + s * rng.standard_normal((size, n - 1))
                return np.array([A.fiber(1, p).affine_mass(a * x0[0], s) for p in P])
            out[k] = mc_expect(sampler, n_samples, seed).value
    return out


def ou_derivative_indicator(A, i: int, t: float, n_samples: int, seed: int, threads: int = 1) -> Estimate:
    """MC estimate of E_mu[d_i P_t 1_A] for an increasing set given by thresholds.

    Differentiating P[e^{-t} x_i + s Y_i >= t_i(A; e^{-t} x + s Y)] in x_i gives
    (e^{-t}/s) phi((t_i - e^{-t} x_i)/s), averaged over x and Y.
    """
    a, s = ou_scales(t)
    n = A.n

    def sampler(rng, size):
        X = rng.standard_normal((size, n))
        Yt = a * X + s * rng.standard_normal((size, n))
        ti = A.threshold(i, Yt)
        return (a / s) * normal_pdf((ti - a * X[:, i - 1]) / s)

    return mc_expect(sampler, n_samples, seed, threads)


def ou_derivative_indicator_halfline(a_level: float, t: float) -> float:
    """Closed form for n = 1, A = (a, inf): e^{-t} phi(a)."""
    e, _ = ou_scales(t)
    return e * float(normal_pdf(a_level))


def ou_derivative(g: SmoothFunction, i: int, t: float, x, rule: QuadratureRule | None = None) -> np.ndarray:
    """d_i P_t g at ``x`` via the commutation d_i P_t = e^{-t} P_t d_i."""
    e, _ = ou_scales(t)
    dg = SmoothFunction(g.n, lambda X: g.partial(i, X))
    return e * ou_apply(dg, t, x, rule)


def gaussian_expectation(f, n: int, rule: QuadratureRule | None = None) -> float:
    rule = rule or gauss_hermite(60 if n == 1 else 30 if n == 2 else 16)
    Y, w = tensor_grid(rule, n)
    return float(np.asarray(f(Y)) @ w)


def gaussian_pnorm(vals_fn, p: float, n: int = 1, rule: QuadratureRule | None = None) -> float:
    """(E|h|^p)^{1/p} under the standard Gaussian by quadrature."""
    return gaussian_expectation(lambda Y: np.abs(vals_fn(Y)) ** p, n, rule) ** (1.0 / p)


def _line_pnorm(h, p: float) -> float:
    """(E|h(Y)|^p)^{1/p} for scalar Y ~ N(0, 1) by adaptive quadrature."""
    val, _ = integrate.quad(lambda y: abs(float(h(np.array([[y]]))[0])) ** p * float(normal_pdf(y)),
                            -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val ** (1.0 / p)


def pnorm_bound_check(g: SmoothFunction, t: float, p: float, rule: QuadratureRule | None = None,
                      tol: float = 1e-9) -> dict:
    """Compare ||d_1 P_t g||_p with t^{-(p-1)/2p} e^{-t/p} ||d_1 g||_1^{1/p} (n = 1).

    For p >= 1 the norm is bounded above by that quantity; for p < 1 it is
    bounded below by t^{(1-p)/2p} e^{-t/p} ||d_1 g||_1^{1/p}. At p = 1 and
    monotone g the two sides coincide, so ``tol`` absorbs quadrature error.
    """
    if g.n != 1:
        raise DomainError("p-norm bound check is one-dimensional")
    inner = rule or gauss_hermite(200)
    lhs = _line_pnorm(lambda Y: ou_derivative(g, 1, t, Y, inner), p)
    l1 = _line_pnorm(lambda Y: g.partial(1, Y), 1.0)
    if p >= 1:
        bound = t ** (-(p - 1) / (2 * p)) * math.exp(-t / p) * l1 ** (1 / p)
        holds = lhs <= bound + tol
        direction = "upper"
    else:
        bound = t ** ((1 - p) / (2 * p)) * math.exp(-t / p) * l1 ** (1 / p)
        holds = lhs >= bound - tol
        direction = "lower"
    return {"p": p, "t": t, "norm": lhs, "bound": bound, "direction": direction, "holds": bool(holds)}


def semigroup_noise_identity(f: SmoothFunction, t: float, rule: QuadratureRule | None = None) -> dict:
    """E[f P_t f] - E[f]^2 next to Var(P_{t/2} f) and Var(P_t f), by quadrature.

    The first two agree by the semigroup property and self-adjointness; the
    third is the variant with P_t in place of P_{t/2}, returned for comparison.
    """
    n = f.n
    outer = rule or gauss_hermite(60 if n == 1 else 24)
    mean = gaussian_expectation(f, n, outer)
    cov = gaussian_expectation(lambda Y: f(Y) * ou_apply(f, t, Y), n, outer) - mean ** 2
    half = gaussian_expectation(lambda Y: ou_apply(f, t / 2, Y) ** 2, n, outer) - mean ** 2
    full = gaussian_expectation(lambda Y: ou_apply(f, t, Y) ** 2, n, outer) - mean ** 2
    return {"t": t, "cov_f_Ptf": cov, "var_P_half_t": half, "var_P_t": full,
            "half_time_gap": abs(cov - half), "full_time_gap": abs(cov - full)}


def covariance_identity_check(f: SmoothFunction, g: SmoothFunction, time_nodes: int = 40,
                              space_nodes: int | None = None, instance: str = "") -> InequalityReport:
    """Both sides of Cov(f, g) = sum_i int_0^inf e^{-t} E[d_i f P_t d_i g] dt.

    With s = e^{-t} the time integral becomes int_0^1 E[d_i f(X) d_i g(sX + sqrt(1-s^2) Y)] ds,
    evaluated by Gauss-Legendre in s and a 2n-dimensional Gauss-Hermite grid in (X, Y).
    """
    n = f.n
    if g.n != n:
        raise DomainError("f and g must share the dimension")
    if n > QUADRATURE_MAX_DIM:
        raise DomainError("covariance identity check is quadrature-only (n <= 3)")
    space_nodes = space_nodes or {1: 80, 2: 40, 3: 12}[n]
    gh = gauss_hermite(space_nodes)
    lhs = (gaussian_expectation(lambda Y: f(Y) * g(Y), n, gh)
           - gaussian_expectation(f, n, gh) * gaussian_expectation(g, n, gh))
    XY, w = tensor_grid(gh, 2 * n)
    X, Y = XY[:, :n], XY[:, n:]
    leg = gauss_legendre(time_nodes, 0.0, 1.0)
    rhs = 0.0
    for i in range(1, n + 1):
        dfx = f.partial(i, X)
        if not np.any(dfx):
            continue
        inner = [float((dfx * g.partial(i, s * X + math.sqrt(1.0 - s * s) * Y)) @ w) for s in leg.nodes]
        rhs += float(np.dot(leg.weights, inner))
    rep = InequalityReport("covariance_identity", lhs=lhs, rhs0=rhs, instance_descriptor=instance,
                           methods={"lhs": "quadrature", "rhs0": "quadrature"}, tolerance=1e-6,
                           details={"abs_discrepancy": abs(lhs - rhs), "time_nodes": time_nodes,
                                    "space_nodes": space_nodes})
    return rep
