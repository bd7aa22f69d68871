"""Gaussian inequality checkers: Talagrand-type correlation bounds, BKS and its inverse."""
from __future__ import annotations

import math

import numpy as np

from ..errors import PreconditionError
from ..numerics import Estimate
from ..report import DEGENERATE, INFLUENCE_ABOVE_ONE, MC_PATH, OUTSIDE_PHI, InequalityReport, talagrand_phi
from .functionals import covariance, geometric_influences, noise_var
from .sets import FiberSet

DEFAULT_SAMPLES = 200_000


def _phi_slope(x: float) -> float:
    """Derivative of x / (1 - log x)."""
    d = 1.0 - math.log(x)
    return (2.0 - math.log(x)) / (d * d)


def _require_increasing(A: FiberSet, name: str) -> None:
    if A.is_increasing() is False:
        raise PreconditionError(f"{name} must be increasing")


def _influences(A: FiberSet, n_samples: int, seed: int, threads: int) -> tuple[np.ndarray, np.ndarray, str]:
    ests = geometric_influences(A, n_samples, seed, threads)
    vals = np.array([e.value for e in ests])
    ses = np.array([e.std_error for e in ests])
    return vals, ses, "mc" if np.any([e.n_samples for e in ests]) else "exact"


def _mc_fields(methods: dict, n_samples: int, seed: int) -> tuple[list[str], int | None, int | None]:
    if "mc" in methods.values():
        return [MC_PATH], seed, n_samples
    return [], None, None


def _tolerance(methods: dict) -> float:
    return 1e-12 if "mc" not in methods.values() else None


def check_gaussian_talagrand(A: FiberSet, B: FiberSet, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                             threads: int = 1, instance: str = "") -> InequalityReport:
    """mu(A n B) - mu(A) mu(B) against phi(sum_i I^G_i(A) I^G_i(B))."""
    _require_increasing(A, "A")
    _require_increasing(B, "B")
    if A.n != B.n:
        raise PreconditionError("sets live in different dimensions")
    cov, cov_m = covariance(A, B, n_samples, seed, threads)
    ia, sa, ma = _influences(A, n_samples, seed + 1, threads)
    ib, sb, mb = _influences(B, n_samples, seed + 1 + A.n, threads)
    arg = float(ia @ ib)
    arg_se = math.sqrt(float(np.sum(ib ** 2 * sa ** 2 + ia ** 2 * sb ** 2)))
    methods = {"lhs": cov_m, "rhs0": "exact" if ma == mb == "exact" else "mc"}
    flags, seed_out, ns = _mc_fields(methods, n_samples, seed)
    rhs0: float | None
    rhs0_se = None
    if arg <= 0.0:
        rhs0 = 0.0
        flags.append(DEGENERATE)
    elif arg > 1.0:
        rhs0 = None
        flags.append(OUTSIDE_PHI)
    else:
        rhs0 = talagrand_phi(arg)
        rhs0_se = _phi_slope(arg) * arg_se if arg_se else None
    return InequalityReport("talagrand_gaussian", cov.value, rhs0, lhs_se=cov.std_error or None,
                            rhs0_se=rhs0_se, flags=flags, instance_descriptor=instance, seed=seed_out,
                            n_samples=ns, methods=methods, tolerance=_tolerance(methods),
                            details={"arg": arg, "arg_se": arg_se, "influences_A": ia.tolist(),
                                     "influences_B": ib.tolist()})


def alt_bound_terms(ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    """I_A I_B / sqrt(log(e / I_A) log(e / I_B)) per coordinate (0 when either influence is 0)."""
    ia = np.asarray(ia, dtype=float)
    ib = np.asarray(ib, dtype=float)
    out = np.zeros(len(ia))
    pos = (ia > 0) & (ib > 0)
    la = 1.0 - np.log(ia[pos])
    lb = 1.0 - np.log(ib[pos])
    out[pos] = ia[pos] * ib[pos] / np.sqrt(la * lb)
    return out


def check_alt_bound(A: FiberSet, B: FiberSet, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                    threads: int = 1, instance: str = "") -> InequalityReport:
    """mu(A n B) - mu(A) mu(B) against the per-coordinate log-corrected influence sum."""
    _require_increasing(A, "A")
    _require_increasing(B, "B")
    cov, cov_m = covariance(A, B, n_samples, seed, threads)
    ia, sa, ma = _influences(A, n_samples, seed + 1, threads)
    ib, sb, mb = _influences(B, n_samples, seed + 1 + A.n, threads)
    methods = {"lhs": cov_m, "rhs0": "exact" if ma == mb == "exact" else "mc"}
    flags, seed_out, ns = _mc_fields(methods, n_samples, seed)
    if np.any(ia > 1.0) or np.any(ib > 1.0):
        flags.append(INFLUENCE_ABOVE_ONE)
    terms = alt_bound_terms(ia, ib)
    rhs0 = float(terms.sum())
    rhs0_se = None
    if methods["rhs0"] == "mc":
        # numerical gradient of each term in (I_A, I_B)
        h = 1e-7
        ga = (alt_bound_terms(ia + h, ib) - alt_bound_terms(np.maximum(ia - h, 0), ib)) / (2 * h)
        gb = (alt_bound_terms(ia, ib + h) - alt_bound_terms(ia, np.maximum(ib - h, 0))) / (2 * h)
        rhs0_se = math.sqrt(float(np.sum(ga ** 2 * sa ** 2 + gb ** 2 * sb ** 2)))
    return InequalityReport("alt_bound_gaussian", cov.value, rhs0, lhs_se=cov.std_error or None,
                            rhs0_se=rhs0_se, flags=flags, instance_descriptor=instance, seed=seed_out,
                            n_samples=ns, methods=methods, tolerance=_tolerance(methods),
                            details={"influences_A": ia.tolist(), "influences_B": ib.tolist()})


def _var_and_influences(A: FiberSet, rho: float, n_samples: int, seed: int, threads: int):
    var, vm = noise_var(A, rho, n_samples, seed, threads)
    infl, ses, im = _influences(A, n_samples, seed + 1, threads)
    s = float(np.sum(infl ** 2))
    s_se = 2.0 * math.sqrt(float(np.sum(infl ** 2 * ses ** 2)))
    return var, vm, infl, s, s_se, im


def inverse_bks_check(A: FiberSet, rho: float, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      threads: int = 1, instance: str = "") -> InequalityReport:
    """VAR^G(A, rho) against (1 - rho^2) sum_i I^G_i(A)^2; the inequality holds with constant 1."""
    _require_increasing(A, "A")
    var, vm, infl, s, s_se, im = _var_and_influences(A, rho, n_samples, seed, threads)
    k = 1.0 - rho * rho
    methods = {"lhs": vm, "rhs0": im}
    flags, seed_out, ns = _mc_fields(methods, n_samples, seed)
    return InequalityReport("gaussian_inverse_bks", var.value, k * s, lhs_se=var.std_error or None,
                            rhs0_se=k * s_se or None, flags=flags, instance_descriptor=instance,
                            seed=seed_out, n_samples=ns, methods=methods, tolerance=_tolerance(methods),
                            details={"rho": rho, "S": s, "influences": infl.tolist()})


def check_gaussian_bks(A: FiberSet, rho: float, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       threads: int = 1, instance: str = "") -> InequalityReport:
    """VAR^G(A, rho) against S = sum_i I^G_i(A)^2, with the exponent log(VAR) / (rho^2 log S)."""
    var, vm, infl, s, s_se, im = _var_and_influences(A, rho, n_samples, seed, threads)
    methods = {"lhs": vm, "rhs0": im}
    flags, seed_out, ns = _mc_fields(methods, n_samples, seed)
    details = {"rho": rho, "S": s, "influences": infl.tolist()}
    if 0.0 < s < 1.0 and var.value > 0.0:
        details["exponent"] = math.log(var.value) / (rho * rho * math.log(s))
    return InequalityReport("bks_gaussian", var.value, s, lhs_se=var.std_error or None,
                            rhs0_se=s_se or None, flags=flags, instance_descriptor=instance,
                            seed=seed_out, n_samples=ns, methods=methods, tolerance=_tolerance(methods),
                            details=details)


def compare_talagrand_bounds(A: FiberSet, B: FiberSet, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                             threads: int = 1) -> dict:
    """Both lower bounds for one pair, and the factor by which the phi-bound exceeds the alt bound."""
    tal = check_gaussian_talagrand(A, B, n_samples, seed, threads)
    alt = check_alt_bound(A, B, n_samples, seed, threads)
    factor = None
    if tal.rhs0 is not None and alt.rhs0:
        factor = tal.rhs0 / alt.rhs0
    return {"lhs": tal.lhs, "phi_bound": tal.rhs0, "alt_bound": alt.rhs0, "phi_over_alt": factor,
            "talagrand": tal, "alt": alt}
