from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from jstab import corpus
from jstab.polyalg import Polynomial, WeightVector, fit_polynomial, initial_ideal, same_ideal
from jstab.stability import (
    StabilityError, TestConfiguration, chow_weight, chow_weight_linear_system, df_invariant,
    divisor_weight_polynomials, infer_dimension, j_weight, minimum_norm, rational_approximation,
    weight_polynomials,
)

from conftest import monomial_weight_sum

P1 = corpus.projective_space(1)


def tc(ideal, w, r=1, d=0):
    return TestConfiguration.create(ideal, WeightVector.of(w, d), r=r, d=d)


def Z(i, n=2):
    return Polynomial.variable(i, n)


def test_infer_dimension():
    assert infer_dimension(corpus.conic()) == 1
    assert infer_dimension(corpus.segre_quadric()) == 2
    assert infer_dimension(corpus.projective_space(2)) == 2


def test_weight_polynomials_scalar_action():
    for c in (1, -2, Fraction(3, 2)):
        data = weight_polynomials(tc(P1, [c, c]))
        assert list(data.h) == [1, 1]
        assert list(data.w) == [0, c, c]
        assert data.b0 == c * data.a0


def test_weight_polynomials_p1():
    data = weight_polynomials(tc(P1, [1, 0]))
    assert list(data.h) == [1, 1]
    assert list(data.w) == [0, Fraction(1, 2), Fraction(1, 2)]
    assert data.b0 == Fraction(1, 2) and data.b1 == Fraction(1, 2)


def test_weight_polynomials_conic_against_brute_force():
    A = [2, 0, -1]
    data = weight_polynomials(tc(corpus.conic(), A))
    assert list(data.h) == [1, 2]
    pts = [(K, monomial_weight_sum([(0, 2, 0)], A, 3, K)) for K in range(1, 9)]
    assert list(data.w) == fit_polynomial(pts, 2)


def test_divisor_data():
    data = divisor_weight_polynomials(tc(P1, [3, 3]), Z(0) + Z(1).scale(2))
    assert list(data.hhat) == [1] and list(data.what) == [0, 3]
    assert data.bhat0 == 3 * data.ahat0
    d0 = divisor_weight_polynomials(tc(P1, [1, 0]), Z(0))
    assert d0.bhat0 == 0
    d1 = divisor_weight_polynomials(tc(P1, [1, 0]), Z(1))
    assert d1.bhat0 == 1 and d1.ahat0 == 1


def test_divisor_in_ideal_rejected():
    with pytest.raises(StabilityError, match="divisor contains component"):
        divisor_weight_polynomials(tc(corpus.conic(), [1, 0, 0]), Polynomial.parse("Z0*Z2 - Z1^2", 3))


def test_chow_examples():
    assert chow_weight(tc(P1, [1, 0]), Z(1)) == 1
    assert chow_weight(tc(P1, [1, 0]), Z(0)) == -1
    assert chow_weight(tc(P1, [5, 5]), Z(0) + Z(1)) == 0


def test_generic_chow_value():
    g = chow_weight_linear_system(tc(P1, [1, 0]), 1, samples=5, seed=0)
    assert g.value == 1
    conic = tc(corpus.conic(), [2, 0, -1])
    values = {chow_weight_linear_system(conic, 1, samples=5, seed=s).value for s in range(3)}
    assert len(values) == 1


def test_j_weight_examples():
    assert j_weight(tc(P1, [1, 0])) == Fraction(1, 2)
    assert j_weight(tc(P1, [1, 0]), Z(0)) == Fraction(-1, 2)
    assert j_weight(tc(P1, [4, 4])) == 0


def test_minimum_norm_examples():
    assert minimum_norm(tc(P1, [1, 0])) == Fraction(1, 2)
    assert minimum_norm(tc(P1, [0, 0])) == 0
    assert minimum_norm(tc(P1, [3, 2])) == minimum_norm(tc(P1, [1, 0]))


def test_df_examples():
    assert df_invariant(tc(P1, [1, 0])) == 0
    assert df_invariant(tc(P1, [7, 7])) == 0


def test_df_conic_against_brute_force():
    A = [2, 0, -1]
    h = [(K, 2 * K + 1) for K in range(1, 9)]
    w = [(K, monomial_weight_sum([(0, 2, 0)], A, 3, K)) for K in range(1, 9)]
    a1, a0 = fit_polynomial(h, 1)
    _, b1, b0 = fit_polynomial(w, 2)
    assert df_invariant(tc(corpus.conic(), A)) == (b0 * a1 - b1 * a0) / a0


# -- covariance -----------------------------------------------------------

def _four(t):
    g = Polynomial.parse(" + ".join(f"{i + 1}*Z{i}" for i in range(t.ideal.nvars)), t.ideal.nvars)
    return chow_weight(t, g), j_weight(t), minimum_norm(t), df_invariant(t)


CASES = [("P1", 2), ("conic", 3), ("twisted_cubic", 4)]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(CASES), st.data())
def test_shift_and_scale_covariance(case, data):
    name, n = case
    w = sorted(data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n)), reverse=True)
    c = data.draw(st.fractions(min_value=-3, max_value=3, max_denominator=4))
    q = data.draw(st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=4))
    I = corpus.named(name)
    base = _four(tc(I, w))
    shifted = _four(tc(I, [x + c for x in w]))
    scaled = _four(tc(I, [q * x for x in w]))
    assert shifted == base
    assert scaled == tuple(q * v for v in base)


# -- rational approximation ----------------------------------------------

def test_rational_approximation_worked_example():
    ideal = corpus.nodal_conic()
    A = WeightVector.of(["w", "0", "-w"], 2)
    Ap = rational_approximation(ideal, A)
    assert list(Ap.entries) == [Fraction(3, 2), 0, Fraction(-3, 2)]
    e = Ap.entries
    assert 2 * e[1] == e[0] + e[2]
    assert same_ideal(initial_ideal(ideal, Ap), initial_ideal(ideal, A))


def test_rational_approximation_rational_input_unchanged():
    A = WeightVector.of([2, 0, -1])
    assert rational_approximation(corpus.conic(), A) is A


def test_rational_approximation_keeps_relation_and_central_fibre():
    ideal = corpus.nodal_conic()
    A = WeightVector.of(["1+w", "1", "1-w"], 2)
    eps = Fraction(1, 100)
    Ap = rational_approximation(ideal, A, epsilon=eps)
    e = Ap.entries
    assert 2 * e[1] == e[0] + e[2]
    assert all(abs(float(x) - float(y)) < eps for x, y in zip(e, A.entries))
    assert same_ideal(initial_ideal(ideal, Ap), initial_ideal(ideal, A))
