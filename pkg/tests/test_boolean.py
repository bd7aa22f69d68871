import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoinf import boolean as B
from geoinf.errors import CapacityError, DomainError, PreconditionError
from geoinf.report import DEGENERATE, OUTSIDE_PHI


def cube_functions(max_n=5, indicator=False):
    def build(n, bits):
        vals = np.array(bits[: 1 << n], dtype=float)
        return B.CubeFunction(n, vals, B.INDICATOR if indicator else B.GENERAL)

    vals = st.integers(0, 1) if indicator else st.floats(-1, 1)
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(vals, min_size=1 << n, max_size=1 << n).map(lambda b: build(n, b)))


def test_table_order_is_lexicographic_with_first_coordinate_most_significant():
    pts = B.cube_points(2)
    assert pts.tolist() == [[-1, -1], [-1, 1], [1, -1], [1, 1]]
    f = B.dictator(3, 1)
    assert f.table.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert f((1, -1, -1)) == 1.0


def test_capacity_and_table_checks():
    with pytest.raises(CapacityError):
        B.cube_points(25)
    with pytest.raises(PreconditionError):
        B.CubeFunction(2, [0, 1, 0])
    with pytest.raises(PreconditionError):
        B.CubeFunction(1, [0, 2], B.INDICATOR)
    with pytest.raises(DomainError):
        B.BiasedMeasure(1.0)


def test_majority_influence_and_expectation():
    maj = B.majority(3)
    assert B.expectation(maj) == 0.5
    np.testing.assert_array_equal(B.influences(maj), [0.5, 0.5, 0.5])


def test_biased_dictator_influence_is_one():
    assert B.influence(B.dictator(2, 2), 2, B.BiasedMeasure(0.2)) == 1.0
    assert B.influence(B.dictator(2, 2), 1, B.BiasedMeasure(0.2)) == 0.0


def test_tribes_influence_closed_form():
    w, c = 2, 3
    f = B.tribes(w, c)
    # coordinate is pivotal when the rest of its tribe is all +1 and no other tribe is
    expected = 0.5 ** (w - 1) * (1 - 0.5 ** w) ** (c - 1)
    assert B.influence(f, 1) == pytest.approx(expected, abs=1e-15)


def test_signed_majority_fourier():
    coeffs = B.fourier(B.majority(3, signed=True)).as_dict(1e-14)
    assert coeffs == {(1,): 0.5, (2,): 0.5, (3,): 0.5, (1, 2, 3): -0.5}


def test_fourier_subset_index():
    fe = B.fourier(B.dictator(3, 2, signed=True))
    assert fe[(2,)] == 1.0
    assert fe[()] == 0.0
    with pytest.raises(DomainError):
        fe.index([4])


def test_parity_has_single_top_coefficient():
    fe = B.fourier(B.parity(4))
    assert fe.as_dict(1e-14) == {(1, 2, 3, 4): 1.0}


@given(cube_functions())
def test_parseval(f):
    assert B.fourier(f).parseval() == pytest.approx(float(np.mean(f.table ** 2)), abs=1e-12)


@given(cube_functions(indicator=True))
def test_indicator_influence_matches_fourier_weight(f):
    # for a {0,1}-valued f, I_i = 4 * sum_{S contains i} f_hat(S)^2
    fe = B.fourier(f)
    idx = np.arange(1 << f.n)
    for i in range(1, f.n + 1):
        mask = (idx >> (f.n - i)) & 1 == 1
        assert B.influence(f, i) == pytest.approx(4 * np.sum(fe.coefficients[mask] ** 2), abs=1e-12)


@settings(max_examples=50)
@given(cube_functions(), st.floats(0.01, 0.99))
def test_noise_var_contraction_equals_fourier(f, eta):
    assert B.noise_var(f, eta) == pytest.approx(B.noise_var_fourier(f, eta), abs=1e-12)


@given(cube_functions(), st.floats(0.01, 0.99), st.floats(0.05, 0.95))
def test_noise_var_nonnegative_and_bounded_by_variance(f, eta, alpha):
    m = B.BiasedMeasure(alpha)
    v = B.noise_var(f, eta, m)
    var = B.expectation(B.CubeFunction(f.n, f.table ** 2), m) - B.expectation(f, m) ** 2
    assert -1e-12 <= v <= var + 1e-12


def test_majority_noise_var_at_half():
    assert B.noise_var(B.majority(3), 0.5) == 13 / 128
    assert B.noise_var_fourier(B.majority(3), 0.5) == pytest.approx(13 / 128, abs=1e-15)


@pytest.mark.parametrize("eta", [0.0, 1.0, -0.1])
def test_noise_eta_domain(eta):
    with pytest.raises(DomainError):
        B.noise_var(B.majority(3), eta)


def test_monotone_detection_and_closure():
    assert B.is_monotone(B.majority(5))
    assert not B.is_monotone(B.parity(3, signed=False))
    point = np.zeros(8, dtype=bool)
    point[0b010] = True
    closure = B.upward_closure(point, 3)
    # everything above (-1, +1, -1)
    assert sorted(np.flatnonzero(closure).tolist()) == [0b010, 0b011, 0b110, 0b111]


@given(st.integers(1, 8), st.floats(0, 1), st.integers(0, 2 ** 32))
def test_random_increasing_is_monotone_and_reproducible(n, density, seed):
    f = B.random_increasing(n, density, seed)
    assert B.is_monotone(f)
    assert np.array_equal(f.table, B.random_increasing(n, density, seed).table)


def test_permute_relabels_coordinates():
    f = B.dictator(3, 1)
    g = f.permute([2, 1, 3])
    assert np.array_equal(g.table, B.dictator(3, 2).table)


def test_talagrand_dictator():
    rep = B.check_talagrand_discrete(B.dictator(), B.dictator())
    assert rep.lhs == 0.25 and rep.rhs0 == 1.0 and rep.ratio == 0.25
    assert rep.flags == []


def test_talagrand_majority_ratio():
    rep = B.check_talagrand_discrete(B.majority(3), B.majority(3))
    arg = 3 * 0.25
    assert rep.details["arg"] == pytest.approx(arg, abs=1e-15)
    assert rep.ratio == pytest.approx(0.25 / (arg / (1 - math.log(arg))), abs=1e-12)
    assert rep.ratio == pytest.approx(0.42922735748, abs=1e-10)


def test_talagrand_flags():
    full = B.constant(2, 1.0)
    rep = B.check_talagrand_discrete(full, B.dictator(2))
    assert rep.rhs0 == 0.0 and DEGENERATE in rep.flags and rep.ratio is None
    # on the uniform cube Cauchy-Schwarz keeps arg <= 1; a sparse bias pushes OR past it
    either = B.CubeFunction(2, [0, 1, 1, 1], B.INDICATOR)
    rep = B.check_talagrand_discrete(either, either, B.BiasedMeasure(0.1))
    assert rep.details["arg"] == pytest.approx(2 * 0.9 ** 2, abs=1e-15)
    assert rep.details["arg"] > 1 and OUTSIDE_PHI in rep.flags and rep.rhs0 is None


def test_talagrand_rejects_non_monotone():
    with pytest.raises(PreconditionError):
        B.check_talagrand_discrete(B.parity(2, signed=False), B.dictator(2))


@settings(max_examples=40)
@given(st.integers(1, 7), st.floats(0.05, 0.6), st.floats(0.05, 0.6), st.integers(0, 1000), st.floats(0.1, 0.9))
def test_harris_kleitman_nonnegative(n, da, db, seed, alpha):
    A = B.random_increasing(n, da, seed)
    Bf = B.random_increasing(n, db, seed + 1)
    rep = B.check_talagrand_discrete(A, Bf, B.BiasedMeasure(alpha))
    assert rep.lhs >= -1e-12


def test_bks_report_exponent():
    rep = B.check_bks_discrete(B.majority(3), 0.5)
    s = 3 * 0.25
    assert rep.rhs0 == pytest.approx(s)
    assert rep.details["exponent"] == pytest.approx(math.log(13 / 128) / (0.5 * math.log(s)), rel=1e-12)


def test_exhaustive_monotone_functions_small_n():
    count = 0
    for n in (1, 2, 3):
        for bits in itertools.product((0.0, 1.0), repeat=1 << n):
            f = B.CubeFunction(n, bits, B.INDICATOR)
            if B.is_monotone(f):
                count += 1
    # Dedekind numbers 3, 6, 20
    assert count == 3 + 6 + 20
