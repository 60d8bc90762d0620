from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from jstab import corpus
from jstab.polyalg import (
    Ideal, PolyAlgError, Polynomial, WeightVector, contains, fit_polynomial, flow_sign_convention,
    graded_dimension, graded_weight, groebner_basis, initial_form, initial_ideal, reduce, same_ideal,
    TermOrder,
)

from conftest import dimension_by_linear_algebra, monomial_weight_sum, monomials


def P(text, n):
    return Polynomial.parse(text, n)


def test_sign_convention_pinned():
    assert flow_sign_convention() == 1


def test_parse_roundtrip_and_errors():
    f = P("Z0*Z2 - Z1^2", 3)
    assert f.degree == 2
    assert P(str(f), 3) == f
    with pytest.raises(PolyAlgError):
        P("Z0 + Z1^2", 3)
    with pytest.raises(PolyAlgError):
        P("Z3", 3)


# -- initial forms --------------------------------------------------------

def test_initial_form_irrational_weights():
    f = P("Z1^2 - Z0*Z2 - Z0*Z1", 3)
    A = WeightVector.of(["w", "0", "-w"], 2)
    assert initial_form(f, A) == P("Z1^2 - Z0*Z2", 3)


def test_initial_form_single_term_and_constant_weights():
    assert initial_form(P("Z0^2", 3), WeightVector.of([5, -1, 2])) == P("Z0^2", 3)
    f = P("Z0*Z2 - Z1^2", 3)
    assert initial_form(f, WeightVector.of([0, 0, 0])) == f


def test_initial_form_of_zero_raises():
    with pytest.raises(PolyAlgError, match="empty polynomial"):
        initial_form(Polynomial({}, 3), WeightVector.of([0, 0, 0]))


weights3 = st.lists(st.integers(-4, 4), min_size=3, max_size=3)


@given(weights3)
def test_initial_form_idempotent(w):
    A = WeightVector.of(w)
    f = P("Z0^3 - 2*Z0*Z1*Z2 + Z1^3 + Z2^2*Z0", 3)
    g = initial_form(f, A)
    assert initial_form(g, A) == g
    assert len({A.weight(m) for m in g.terms}) == 1


# -- Groebner bases -------------------------------------------------------

def test_principal_ideal_is_its_own_basis():
    gb = groebner_basis(corpus.conic(), WeightVector.of([1, 0, 0]))
    assert len(gb) == 1
    assert same_ideal(Ideal(tuple(gb), 3), corpus.conic())


def _s_pairs_reduce(gb, order):
    from itertools import combinations
    for f, g in combinations(gb, 2):
        lf, lg = order.leading(f), order.leading(g)
        lcm = tuple(max(a, b) for a, b in zip(lf, lg))
        sf = f.shift(tuple(a - b for a, b in zip(lcm, lf))).scale(1 / f.terms[lf])
        sg = g.shift(tuple(a - b for a, b in zip(lcm, lg))).scale(1 / g.terms[lg])
        yield reduce(sf - sg, gb, order)


def test_twisted_cubic_basis_is_closed_under_s_pairs():
    gb = groebner_basis(corpus.twisted_cubic(), WeightVector.zero(4))
    assert len(gb) == 3
    order = TermOrder(WeightVector.zero(4))
    assert all(r.is_zero() for r in _s_pairs_reduce(gb, order))


def test_weighted_basis_closed_under_s_pairs():
    A = WeightVector.of([3, 1, 0, -2])
    gb = groebner_basis(corpus.rational_normal_curve(3), A)
    assert all(r.is_zero() for r in _s_pairs_reduce(gb, TermOrder(A)))


def test_irrational_order_initial_ideal_counts():
    ideal = corpus.nodal_conic()
    A = WeightVector.of(["w", "0", "-w"], 2)
    I0 = initial_ideal(ideal, A)
    assert same_ideal(I0, Ideal.parse(["Z1^2 - Z0*Z2"], 3))
    for K in range(1, 5):
        assert graded_dimension(I0, K) == dimension_by_linear_algebra(I0, K)


# -- initial ideals -------------------------------------------------------

def test_zero_weights_fix_ideal():
    for name in corpus.names():
        I = corpus.named(name)
        assert same_ideal(initial_ideal(I, WeightVector.zero(I.nvars)), I)


def test_conic_initial_ideals():
    c = corpus.conic()
    assert same_ideal(initial_ideal(c, WeightVector.of([1, 0, -1])), c)
    assert same_ideal(initial_ideal(c, WeightVector.of([2, 0, -1])), Ideal.parse(["Z1^2"], 3))


# -- graded dimension and weight -----------------------------------------

def test_graded_dimension_examples():
    assert graded_dimension(Ideal.zero(3), 2) == 6
    assert graded_dimension(corpus.conic(), 3) == 7
    assert graded_dimension(corpus.twisted_cubic(), 2) == 7


@pytest.mark.parametrize("name", ["conic", "twisted_cubic", "segre", "plane_cubic", "rnc4"])
def test_graded_dimension_matches_linear_algebra(name):
    I = corpus.named(name)
    for K in range(0, 5):
        assert graded_dimension(I, K) == dimension_by_linear_algebra(I, K)


def test_graded_weight_examples():
    assert graded_weight(Ideal.zero(2), WeightVector.of([1, 0]), 2) == 3
    A = WeightVector.of([2, 0, -1])
    assert graded_weight(Ideal.parse(["Z1^2"], 3), A, 1) == 1


def test_graded_weight_brute_force():
    A = [2, 0, -1]
    I0 = Ideal.parse(["Z1^2"], 3)
    for K in range(0, 7):
        assert graded_weight(I0, WeightVector.of(A), K) == monomial_weight_sum([(0, 2, 0)], A, 3, K)


@given(st.integers(-5, 5), st.integers(0, 5))
def test_graded_weight_constant(c, K):
    I = corpus.conic()
    assert graded_weight(I, WeightVector.of([c] * 3), K) == c * K * graded_dimension(I, K)


def test_graded_weight_rejects_non_homogeneous():
    with pytest.raises(PolyAlgError, match="incompatible weight"):
        graded_weight(corpus.conic(), WeightVector.of([2, 0, -1]), 2)


def test_contains():
    tc = corpus.twisted_cubic()
    assert contains(tc, P("Z0*Z3 - Z1*Z2", 4) * P("Z0", 4))
    assert not contains(tc, P("Z0", 4))


# -- fitting --------------------------------------------------------------

def test_fit_examples():
    assert fit_polynomial([(1, 3), (2, 5), (3, 7)], 1) == [1, 2]
    assert fit_polynomial([(0, 0), (1, 1), (2, 4)], 2) == [0, 0, 1]
    assert fit_polynomial([(1, 1), (2, 3), (3, 6), (4, 10)], 2) == [0, Fraction(1, 2), Fraction(1, 2)]


def test_fit_rejects_wrong_degree():
    with pytest.raises(PolyAlgError, match="not a polynomial of stated degree"):
        fit_polynomial([(1, 1), (2, 4), (3, 9), (4, 17)], 2)


@settings(max_examples=50)
@given(st.lists(st.fractions(max_denominator=9, min_value=-9, max_value=9), min_size=1, max_size=4))
def test_fit_recovers_coefficients(coeffs):
    pts = [(x, sum(c * x ** i for i, c in enumerate(coeffs))) for x in range(1, len(coeffs) + 3)]
    fitted = fit_polynomial(pts, len(coeffs) - 1)
    assert fitted == list(coeffs)
