import math

import pytest

from geoinf.errors import ConfigError
from geoinf.gaussian import HalfSpace, threshold_pair
from geoinf.report import DEGENERATE, InequalityReport
from geoinf.verify import (REGISTRY, compare_bounds, identity_broken, lhs_negative, lower_bound_broken,
                           one_dimensional_pair_grid, run_sweep)


def test_unknown_theorem_id():
    with pytest.raises(ConfigError):
        run_sweep("no_such_theorem", 5, 0)
    with pytest.raises(ConfigError):
        run_sweep("bks_discrete", -1, 0)


def test_empty_sweep_is_degenerate():
    s = run_sweep("talagrand_discrete", 0, 0)
    assert s.instance_count == 0 and s.min_ratio is None and DEGENERATE in s.flags
    assert s.passed


@pytest.mark.parametrize("tid", sorted(REGISTRY))
def test_every_registered_sweep_passes(tid):
    s = run_sweep(tid, 12, seed=5, n_samples=5000)
    assert s.instance_count == 12
    assert s.failures == 0, [r.to_dict() for r in s.reports if REGISTRY[tid].failed(r)]


@pytest.mark.parametrize("tid", ["talagrand_gaussian", "bks_gaussian", "talagrand_product_space"])
def test_sweep_is_reproducible_and_thread_invariant(tid):
    a = run_sweep(tid, 10, seed=42, n_samples=4000)
    b = run_sweep(tid, 10, seed=42, n_samples=4000, threads=4)
    assert [r.to_dict() for r in a.reports] == [r.to_dict() for r in b.reports]
    c = run_sweep(tid, 10, seed=43, n_samples=4000)
    assert [r.to_dict() for r in a.reports] != [r.to_dict() for r in c.reports]


def test_failure_predicates():
    ok = InequalityReport("x", 0.5, 0.5, tolerance=1e-10)
    assert not identity_broken(ok) and not lhs_negative(ok) and not lower_bound_broken(ok)
    assert identity_broken(InequalityReport("x", 0.5, 0.6, tolerance=1e-10))
    assert lhs_negative(InequalityReport("x", -1e-6, 0.1))
    assert not lhs_negative(InequalityReport("x", -1e-6, 0.1, lhs_se=1e-6))
    assert lower_bound_broken(InequalityReport("x", 0.1, 0.2))
    assert not lower_bound_broken(InequalityReport("x", 0.1, 0.11, lhs_se=0.01))


def test_compare_bounds_one_dimensional_grid():
    pairs = one_dimensional_pair_grid(50)
    assert len(pairs) == 50
    for A, Bs in pairs:
        c = compare_bounds(A, Bs)
        assert c.dominant == "alt"
        assert c.alt_bound > c.phi_bound > 0


def test_compare_bounds_threshold_pair_small_t():
    c = compare_bounds(*threshold_pair(0.0, 16))
    assert c.dominant == "phi"
    assert 1.0 < c.phi_over_alt < 10 * math.log(16)
    d = c.to_dict()
    assert d["dominant"] == "phi" and len(d["reports"]) == 2


def test_compare_bounds_undefined():
    A = HalfSpace([1.0], 0.0)
    c = compare_bounds(A, HalfSpace([1.0], math.inf))
    assert c.dominant in ("undefined", "tie")


def test_compare_bounds_far_apart_halflines():
    c = compare_bounds(HalfSpace([1.0], -2.0), HalfSpace([1.0], math.exp(2.0)))
    assert c.dominant == "alt"
