import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoinf import boolean as B
from geoinf.bridge import (DiscreteMeasure, HFunction, ProductSpaceSet, SymmetricLift, check_discrete1,
                           check_discrete2, clt_influence_limit, clt_lift, eta_from_rho, fiber_masses,
                           h_influence, h_influences, influence_relation_checks, lemma_coupling_check,
                           lift_set, lifted_influence, product_measure, quantile_map, rho_from_eta)
from geoinf.errors import CapacityError, DomainError, PreconditionError
from geoinf.gaussian import SmoothFunction, check_increasing, tanh_coordinate
from geoinf.numerics import normal_cdf, normal_pdf

measures = st.lists(st.floats(0.05, 1.0), min_size=2, max_size=5).map(
    lambda v: DiscreteMeasure(tuple(np.asarray(v) / np.sum(v))))


def random_set(rng, q, n, increasing=False):
    tab = rng.random((q,) * n) < 0.5
    if increasing:
        for ax in range(n):
            tab = np.logical_or.accumulate(tab, axis=ax)
    return ProductSpaceSet(q, n, tab)


def test_measure_validation():
    with pytest.raises(DomainError):
        DiscreteMeasure((0.5, 0.6))
    with pytest.raises(DomainError):
        DiscreteMeasure((1.0, 0.0))
    with pytest.raises(DomainError):
        DiscreteMeasure.biased(1.0)
    assert DiscreteMeasure.biased(0.25).atoms == (0.75, 0.25)


def test_product_set_validation():
    with pytest.raises(PreconditionError):
        ProductSpaceSet(3, 2, np.zeros(8))
    with pytest.raises(CapacityError):
        ProductSpaceSet(16, 7, np.zeros(1))


@given(measures)
def test_quantile_map_pushes_gaussian_onto_gamma(gamma):
    qm = quantile_map(gamma)
    cells = np.array([float(normal_cdf(qm.cell(k)[1]) - normal_cdf(qm.cell(k)[0]))
                      for k in range(1, gamma.q + 1)])
    np.testing.assert_allclose(cells, gamma.weights, atol=1e-12)
    assert qm(qm.thresholds).tolist() == list(range(2, gamma.q + 1))
    assert qm(-50.0) == 1 and qm(50.0) == gamma.q


def test_biased_threshold_value():
    assert quantile_map(DiscreteMeasure.biased(0.25)).thresholds[0] == pytest.approx(0.6744897501960817,
                                                                                        abs=1e-14)


@settings(deadline=None)
@given(measures, st.integers(1, 3), st.integers(0, 10_000))
def test_lift_preserves_measure(gamma, n, seed):
    A = random_set(np.random.default_rng(seed), gamma.q, n)
    assert lift_set(A, gamma).exact_measure() == pytest.approx(product_measure(A, gamma), abs=1e-12)


@settings(deadline=None)
@given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 10_000))
def test_lift_of_increasing_set_is_increasing(q, n, seed):
    rng = np.random.default_rng(seed)
    A = random_set(rng, q, n, increasing=True)
    G = lift_set(A, DiscreteMeasure.uniform(q))
    assert G.is_increasing()
    assert check_increasing(G, 200, rng)


@settings(deadline=None)
@given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 10_000))
def test_lifted_influence_equals_h_influence_for_increasing(q, n, seed):
    rng = np.random.default_rng(seed)
    gamma = DiscreteMeasure.uniform(q)
    A = random_set(rng, q, n, increasing=True)
    for rep in influence_relation_checks(A, gamma):
        if rep.theorem_id == "lifted_influence_bound":
            assert rep.lhs == pytest.approx(rep.rhs0, abs=1e-12)


@settings(deadline=None)
@given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 10_000))
def test_lifted_influence_dominates_h_influence(q, n, seed):
    rng = np.random.default_rng(seed)
    A = random_set(rng, q, n)
    for rep in influence_relation_checks(A, DiscreteMeasure.uniform(q)):
        if rep.theorem_id == "lifted_influence_bound":
            assert rep.lhs >= rep.rhs0 - 1e-12


def test_h_influence_dictator():
    A = ProductSpaceSet.from_cube(B.dictator(2, 1))
    gamma = DiscreteMeasure.biased(0.25)
    assert h_influence(A, 1, gamma) == pytest.approx(float(normal_pdf(0.6744897501960817)), abs=1e-14)
    assert h_influence(A, 2, gamma) == 0.0
    assert fiber_masses(A, 1, gamma).tolist() == [0.25, 0.25]


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5])
def test_h_influence_proportional_to_influence(alpha):
    rng = np.random.default_rng(7)
    gamma = DiscreteMeasure.biased(alpha)
    ratios = set()
    for _ in range(10):
        A = random_set(rng, 2, 4, increasing=True)
        for rep in influence_relation_checks(A, gamma):
            if rep.theorem_id == "h_influence_proportionality":
                assert rep.lhs == pytest.approx(rep.rhs0, abs=1e-12)
                if rep.details["influence"] > 0:
                    ratios.add(round(rep.lhs / rep.details["influence"], 10))
            if rep.theorem_id == "h_influence_variance_bound":
                assert rep.lhs >= rep.rhs0 - 1e-12
    assert len(ratios) == 1


def test_h_function_presets():
    t = np.array([0.0, 0.3, 1.0])
    np.testing.assert_allclose(HFunction.variance()(t), [0.0, 0.21, 0.0])
    np.testing.assert_array_equal(HFunction.bkkkl()(t), [0.0, 1.0, 0.0])
    assert HFunction.gaussian_isoperimetric()(t)[[0, 2]].tolist() == [0.0, 0.0]
    A = ProductSpaceSet.from_cube(B.majority(3))
    np.testing.assert_allclose(h_influences(A, DiscreteMeasure.uniform(2), HFunction.bkkkl()), [0.5] * 3)


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5])
def test_eta_increasing_in_rho(alpha):
    rhos = np.linspace(0.01, 0.99, 50)
    etas = [eta_from_rho(r, alpha) for r in rhos]
    assert all(b > a for a, b in zip(etas, etas[1:]))
    assert 0.0 < etas[0] and etas[-1] < 1.0


def test_eta_uniform_value():
    assert eta_from_rho(0.5, 0.5) == pytest.approx(1 / 3, abs=1e-14)


@given(st.floats(0.02, 0.98), st.sampled_from([0.1, 0.25, 0.5, 0.7]))
def test_rho_eta_round_trip(rho, alpha):
    assert rho_from_eta(eta_from_rho(rho, alpha), alpha) == pytest.approx(rho, abs=1e-8)


@settings(deadline=None)
@given(st.integers(1, 4), st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 10_000))
def test_coupling_identity(n, alpha, rho, seed):
    A = random_set(np.random.default_rng(seed), 2, n)
    rep = lemma_coupling_check(A, alpha, rho)
    assert rep.details["abs_discrepancy"] <= 1e-8


def test_check_discrete2_majority():
    A = ProductSpaceSet.from_cube(B.majority(3))
    rep = check_discrete2(A, 0.5, 0.5)
    assert rep.lhs == pytest.approx(13 / 128, abs=1e-15)
    assert rep.rhs0 == pytest.approx(3 * (normal_pdf(0.0) / 2) ** 2, abs=1e-15)
    assert eta_from_rho(rep.details["rho"], 0.5) == pytest.approx(0.5, abs=1e-12)
    rep = check_discrete2(A, 0.5, 1 / 3)
    assert rep.lhs == pytest.approx(3 / 16 * 2 / 3 + 1 / 16 * 8 / 27, abs=1e-15)
    assert rep.details["rho"] == pytest.approx(0.5, abs=1e-12)


def test_check_discrete1_uniform_three():
    gamma = DiscreteMeasure.uniform(3)
    A = ProductSpaceSet.from_predicate(3, 2, lambda X: X[:, 0] >= 2)
    Bs = ProductSpaceSet.from_predicate(3, 2, lambda X: (X[:, 0] >= 2) & (X[:, 1] >= 2))
    rep = check_discrete1(A, Bs, gamma)
    assert rep.lhs == pytest.approx(4 / 9 - (2 / 3) * (4 / 9), abs=1e-15)
    assert rep.rhs0 > 0
    with pytest.raises(PreconditionError):
        check_discrete1(ProductSpaceSet.from_predicate(3, 2, lambda X: X[:, 0] == 1), Bs, gamma)


def test_clt_lift_of_identity_takes_half_integer_grid():
    f = SmoothFunction(1, lambda X: X[:, 0], [lambda X: np.ones(len(X))])
    lift = clt_lift(f, 4)
    assert sorted(set(np.round(lift.table * 2, 12).tolist())) == [-4.0, -2.0, 0.0, 2.0, 4.0]


def test_clt_lift_block_symmetry():
    f = SmoothFunction(2, lambda X: np.tanh(X[:, 0] - 0.5 * X[:, 1]))
    lift = clt_lift(f, 3)
    perm = [2, 3, 1, 6, 4, 5]
    np.testing.assert_allclose(lift.permute(perm).table, lift.table, atol=1e-15)
    assert B.influence(lift, 1) == pytest.approx(B.influence(lift, 2), abs=1e-15)


def test_symmetric_lift_matches_table():
    f = tanh_coordinate(1, 1)
    table_lift = clt_lift(f, 16)
    sym = SymmetricLift(16, f(((2 * np.arange(17) - 16) / 4.0)[:, None]))
    assert sym.influence() == pytest.approx(B.influence(table_lift, 1), abs=1e-14)
    assert sym.expectation() == pytest.approx(B.expectation(table_lift), abs=1e-14)
    assert isinstance(clt_lift(f, 64), SymmetricLift)
    with pytest.raises(CapacityError):
        clt_lift(tanh_coordinate(2, 1), 20)


def test_clt_influence_limit_rate():
    rows = clt_influence_limit(tanh_coordinate(1, 1), 1, [64, 256, 1024, 4096])
    assert rows[0]["target"] == pytest.approx(1.2114110192043, abs=1e-12)
    base = rows[0]["rel_error"] * math.sqrt(64)
    for r in rows:
        assert r["rel_error"] <= 4 * base / math.sqrt(r["m"])
    assert rows[-1]["rel_error"] < rows[0]["rel_error"]


def test_clt_clamp_target():
    c = 1.5
    f = SmoothFunction(1, lambda X: np.clip(X[:, 0], -c, c) / c, [lambda X: (np.abs(X[:, 0]) < c) / c])
    rows = clt_influence_limit(f, 1, [1024, 4096])
    exact = 2 * (2 * float(normal_cdf(c)) - 1) / c
    assert rows[-1]["scaled_influence"] == pytest.approx(exact, rel=0.02)
    assert lifted_influence(f, 1, 1024) > 0
