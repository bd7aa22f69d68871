"""Command-line front end: ``geoinf <command> [options]``.

Cube instances (``--cube``): dictator, dictator:n:i, maj3, maj:n, parity:n,
tribes:width:count, const:n:value, random-increasing:density:seed[:n], or a
path to a table file (one value per line, lexicographic point order).

Gaussian instances (``--set``): halfspace:t:n, threshold-pair:t:n, quadrant:n,
orthant:a1,a2,..., halfline:a.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import boolean as B
from .bridge import (DiscreteMeasure, ProductSpaceSet, check_discrete1, check_discrete2,
                     clt_influence_limit, eta_from_rho, influence_relation_checks, lemma_coupling_check,
                     lift_set, product_measure, rho_from_eta)
from .errors import ConfigError, GeoinfError
from .gaussian import (HalfSpace, Orthant, SmoothFunction, check_alt_bound, check_gaussian_bks,
                       check_gaussian_talagrand, exact_noise_var, gaussian_noise_var, geometric_influence,
                       halfspace, inverse_bks_check, quadrant, tanh_coordinate, threshold_pair)
from .gaussian.sets import FiberSet
from .report import InequalityReport, dumps_csv, dumps_json
from .verify import REGISTRY, run_sweep

DEFAULT_SAMPLES = 200_000


# -- instance parsing --------------------------------------------------------------------

def _parts(spec: str) -> list[str]:
    return spec.split(":")


def _num(s: str, what: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"bad number {s!r} for {what}") from None


def _int(s: str, what: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"bad integer {s!r} for {what}") from None


def load_table_file(path: str) -> B.CubeFunction:
    with open(path, encoding="utf-8") as fh:
        vals = [float(line) for line in fh if line.strip()]
    n = int(round(math.log2(len(vals)))) if vals else 0
    if n < 1 or 1 << n != len(vals):
        raise ConfigError(f"table file {path!r} has {len(vals)} values; expected 2^n")
    tag = B.INDICATOR if all(v in (0.0, 1.0) for v in vals) else B.GENERAL
    return B.CubeFunction(n, np.array(vals), tag)


def parse_cube(spec: str) -> B.CubeFunction:
    p = _parts(spec)
    name = p[0]
    if name == "dictator":
        n = _int(p[1], "n") if len(p) > 1 else 1
        i = _int(p[2], "i") if len(p) > 2 else 1
        return B.dictator(n, i)
    if name == "maj3":
        return B.majority(3)
    if name == "maj" and len(p) == 2:
        return B.majority(_int(p[1], "n"))
    if name == "parity" and len(p) == 2:
        return B.parity(_int(p[1], "n"), signed=False)
    if name == "tribes" and len(p) == 3:
        return B.tribes(_int(p[1], "width"), _int(p[2], "count"))
    if name == "const" and len(p) == 3:
        return B.constant(_int(p[1], "n"), _num(p[2], "value"))
    if name == "random-increasing" and len(p) in (3, 4):
        n = _int(p[3], "n") if len(p) == 4 else 10
        return B.random_increasing(n, _num(p[1], "density"), _int(p[2], "seed"))
    if os.path.isfile(spec):
        return load_table_file(spec)
    raise ConfigError(f"unknown cube instance {spec!r}")


def parse_sets(spec: str) -> tuple[FiberSet, FiberSet | None]:
    """A Gaussian instance; threshold-pair specs also yield their partner set."""
    p = _parts(spec)
    name = p[0]
    if name == "halfspace" and len(p) == 3:
        return halfspace(_num(p[1], "t"), _int(p[2], "n")), None
    if name == "threshold-pair" and len(p) == 3:
        return threshold_pair(_num(p[1], "t"), _int(p[2], "n"))
    if name == "quadrant":
        return quadrant(_int(p[1], "n") if len(p) > 1 else 2), None
    if name == "orthant" and len(p) == 2:
        return Orthant([_num(v, "level") for v in p[1].split(",")], name=spec), None
    if name == "halfline" and len(p) == 2:
        return HalfSpace([1.0], _num(p[1], "a"), name=spec), None
    raise ConfigError(f"unknown Gaussian instance {spec!r}")


def parse_set(spec: str) -> FiberSet:
    return parse_sets(spec)[0]


def parse_function(spec: str) -> SmoothFunction:
    p = _parts(spec)
    if p[0] == "tanh":
        return tanh_coordinate(1, 1, _num(p[1], "scale") if len(p) > 1 else 1.0)
    if p[0] == "clamp":
        c = _num(p[1], "c") if len(p) > 1 else 3.0
        return SmoothFunction(1, lambda X: np.clip(X[:, 0], -c, c) / c,
                              [lambda X: (np.abs(X[:, 0]) < c) / c], name=spec)
    raise ConfigError(f"unknown function {spec!r}; use tanh[:scale] or clamp[:c]")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for {args.command}")


# -- commands --------------------------------------------------------------------------------

def _value(quantity: str, value: float, method: str, std_error: float | None = None, **extra) -> dict:
    out = {"quantity": quantity, "value": value, "method": method}
    if method == "mc":
        out["std_error"] = std_error
    out.update(extra)
    return out


def cmd_influence(args) -> list:
    _require(args, "cube")
    f = parse_cube(args.cube)
    m = B.BiasedMeasure(args.alpha)
    coords = [args.i] if args.i else range(1, f.n + 1)
    return [_value("influence", B.influence(f, i, m), "exact", coordinate=i) for i in coords]


def cmd_geo_influence(args) -> list:
    _require(args, "set")
    A = parse_set(args.set)
    coords = [args.i] if args.i else range(1, A.n + 1)
    out = []
    for i in coords:
        exact = A.exact_influence(i)
        if exact is not None:
            out.append(_value("geometric_influence", exact, "exact", coordinate=i))
        est = geometric_influence(A, i, args.samples, args.seed + i, args.threads)
        out.append(_value("geometric_influence", est.value, "mc", est.std_error, coordinate=i,
                          seed=args.seed + i, n_samples=est.n_samples))
    return out


def cmd_noise(args) -> list:
    _require(args, "cube", "eta")
    f = parse_cube(args.cube)
    return [_value("noise_var", B.noise_var(f, args.eta, B.BiasedMeasure(args.alpha)), "exact",
                   eta=args.eta, alpha=args.alpha)]


def cmd_gauss_noise(args) -> list:
    _require(args, "set", "rho")
    A = parse_set(args.set)
    out = []
    exact = exact_noise_var(A, args.rho)
    if exact is not None:
        out.append(_value("gaussian_noise_var", exact, "exact", rho=args.rho))
    est = gaussian_noise_var(A, args.rho, args.samples, args.seed, args.threads)
    out.append(_value("gaussian_noise_var", est.value, "mc", est.std_error, rho=args.rho,
                      seed=args.seed, n_samples=est.n_samples))
    return out


def cmd_fourier(args) -> list:
    _require(args, "cube")
    fe = B.fourier(parse_cube(args.cube))
    return [_value("fourier_coefficient", v, "exact", subset=list(s)) for s, v in fe.as_dict(args.tol).items()]


def _cube_pair(args):
    _require(args, "cube")
    A = parse_cube(args.cube)
    return A, parse_cube(args.cube2) if args.cube2 else A


def _set_pair(args):
    _require(args, "set")
    A, partner = parse_sets(args.set)
    if args.set2:
        return A, parse_set(args.set2)
    return A, partner if partner is not None else A


def cmd_check(args) -> list:
    _require(args, "theorem")
    tid = args.theorem
    kw = dict(n_samples=args.samples, seed=args.seed, threads=args.threads)
    if tid == "talagrand_discrete":
        A, Bc = _cube_pair(args)
        return [B.check_talagrand_discrete(A, Bc, B.BiasedMeasure(args.alpha), instance=args.cube)]
    if tid == "bks_discrete":
        _require(args, "cube", "eta")
        return [B.check_bks_discrete(parse_cube(args.cube), args.eta, B.BiasedMeasure(args.alpha), instance=args.cube)]
    if tid in ("talagrand_gaussian", "alt_bound_gaussian"):
        A, Bs = _set_pair(args)
        fn = check_gaussian_talagrand if tid == "talagrand_gaussian" else check_alt_bound
        return [fn(A, Bs, instance=args.set, **kw)]
    if tid in ("gaussian_inverse_bks", "bks_gaussian"):
        _require(args, "set", "rho")
        fn = inverse_bks_check if tid == "gaussian_inverse_bks" else check_gaussian_bks
        return [fn(parse_set(args.set), args.rho, instance=args.set, **kw)]
    if tid == "coupling_identity":
        _require(args, "cube", "rho")
        return [lemma_coupling_check(ProductSpaceSet.from_cube(parse_cube(args.cube)), args.alpha, args.rho,
                                     instance=args.cube)]
    if tid == "talagrand_product_space":
        A, Bc = _cube_pair(args)
        return [check_discrete1(ProductSpaceSet.from_cube(A), ProductSpaceSet.from_cube(Bc),
                                DiscreteMeasure.biased(args.alpha), instance=args.cube)]
    if tid == "bks_biased_cube":
        _require(args, "cube", "eta")
        return [check_discrete2(ProductSpaceSet.from_cube(parse_cube(args.cube)), args.alpha, args.eta,
                                instance=args.cube)]
    raise ConfigError(f"unknown theorem id {tid!r}; known: {', '.join(sorted(REGISTRY))}")


def cmd_sweep(args):
    _require(args, "theorem")
    summary = run_sweep(args.theorem, args.count, args.seed, n_samples=args.samples, threads=args.threads)
    return summary


def cmd_lift(args) -> list:
    f = parse_function(args.function)
    ms = [_int(v, "m") for v in args.m.split(",")]
    rows = clt_influence_limit(f, 1, ms)
    return [dict(r, quantity="scaled_lifted_influence", method="exact", target_method="quadrature")
            for r in rows]


def cmd_reduce(args) -> list:
    _require(args, "cube")
    A = ProductSpaceSet.from_cube(parse_cube(args.cube))
    gamma = DiscreteMeasure.biased(args.alpha)
    lifted = lift_set(A, gamma)
    out: list = [_value("discrete_measure", product_measure(A, gamma), "exact"),
                 _value("lifted_measure", lifted.exact_measure(), "exact")]
    out.extend(influence_relation_checks(A, gamma, args.samples, args.seed, instance=args.cube))
    return out


def cmd_eta(args) -> list:
    if (args.rho is None) == (args.eta is None):
        raise ConfigError("give exactly one of --rho and --eta")
    if args.rho is not None:
        return [{"quantity": "eta", "eta": eta_from_rho(args.rho, args.alpha), "rho": args.rho,
                 "alpha": args.alpha, "method": "exact"}]
    return [{"quantity": "rho", "rho": rho_from_eta(args.eta, args.alpha), "eta": args.eta,
             "alpha": args.alpha, "method": "exact"}]


COMMANDS = {
    "influence": cmd_influence, "geo-influence": cmd_geo_influence, "noise": cmd_noise,
    "gauss-noise": cmd_gauss_noise, "fourier": cmd_fourier, "check": cmd_check, "sweep": cmd_sweep,
    "lift": cmd_lift, "reduce": cmd_reduce, "eta": cmd_eta,
}


# -- argument parsing and output ---------------------------------------------------------------

def _u64(s: str) -> int:
    v = int(s)
    if not (0 <= v < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("--threads", type=_positive_int, default=1)

    parser = argparse.ArgumentParser(prog="geoinf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "influence": ("discrete influences of a cube function", ("cube", "i", "alpha")),
        "geo-influence": ("geometric influences of a Gaussian set", ("set", "i")),
        "noise": ("discrete noise sensitivity VAR(f, eta)", ("cube", "eta", "alpha")),
        "gauss-noise": ("Gaussian noise sensitivity VAR^G(A, rho)", ("set", "rho")),
        "fourier": ("Walsh-Fourier coefficients", ("cube", "tol")),
        "check": ("run one inequality checker", ("theorem", "cube", "cube2", "set", "set2", "rho", "eta", "alpha")),
        "sweep": ("run a checker over a random instance family", ("theorem", "count")),
        "lift": ("CLT lift: scaled influence against its Gaussian limit", ("function", "m")),
        "reduce": ("quantile reduction of a biased-cube set to Gaussian space", ("cube", "alpha")),
        "eta": ("discrete/Gaussian noise level correspondence", ("rho", "eta", "alpha")),
    }
    options = {
        "cube": dict(default=None), "cube2": dict(default=None), "set": dict(default=None),
        "set2": dict(default=None), "theorem": dict(default=None),
        "i": dict(type=int, default=None), "alpha": dict(type=float, default=0.5),
        "eta": dict(type=float, default=None), "rho": dict(type=float, default=None),
        "tol": dict(type=float, default=1e-12), "count": dict(type=int, default=100),
        "function": dict(default="tanh"), "m": dict(default="64,256,1024,4096"),
    }
    for name, (help_text, opts) in specs.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        for o in opts:
            p.add_argument(f"--{o}", **options[o])
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("threads", "out")}
    cfg["n_samples"] = cfg.pop("samples")
    return cfg


def _flatten(results) -> list[dict]:
    rows = []
    for r in results:
        rows.append(r.to_dict() if isinstance(r, InequalityReport) else r)
    return rows


def _csv_generic(rows: list[dict]) -> str:
    import csv
    import io
    from .report import round_sig
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: round_sig(v) for k, v in r.items()})
    return buf.getvalue()


def render(args, results) -> str:
    if args.format == "json":
        if hasattr(results, "to_dict") and not isinstance(results, InequalityReport):
            summary = results.to_dict(with_reports=False)
            payload = {"command": args.command, "config": _config(args), "summary": summary,
                       "results": [r.to_dict() for r in results.reports]}
        else:
            payload = {"command": args.command, "config": _config(args), "results": _flatten(results)}
        return dumps_json(payload)
    items = results.reports if hasattr(results, "reports") else results
    reports = [r for r in items if isinstance(r, InequalityReport)]
    if reports or hasattr(results, "reports"):
        # CSV carries the fixed report columns only; scalar side results stay in JSON
        return dumps_csv(reports)
    return _csv_generic(_flatten(items))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        results = COMMANDS[args.command](args)
        text = render(args, results)
    except GeoinfError as exc:
        print(f"geoinf: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"geoinf: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
