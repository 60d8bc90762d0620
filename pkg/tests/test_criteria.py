from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jstab.criteria import (
    CriteriaError, adjunction_defects, builtin, check_criteria, failing_curve, gamma, is_nef,
    parse_fan, to_fraction, toric_surface_from_fan,
)

F1_FAN = "1,0;0,1;-1,1;0,-1"


def test_gamma_examples():
    m = builtin("P1xP1")
    assert gamma(m, m.cls([1, 1]), m.cls([2, 1])) == Fraction(3, 2)
    assert gamma(m, m.cls([1, 1]), m.canonical) == -2
    p2 = builtin("P2")
    for d in (1, 2, 5):
        assert gamma(p2, p2.cls([1]), p2.cls([d])) == d


def test_gamma_requires_ample_l1():
    m = builtin("P1xP1")
    with pytest.raises(CriteriaError, match="L1 not big/ample"):
        gamma(m, m.cls([1, 0]), m.cls([1, 1]))


def test_nefness():
    m = builtin("P1xP1")
    assert is_nef(m, m.cls([0, 0]))
    assert not is_nef(m, m.cls([1, -1]))
    assert failing_curve(m, m.cls([1, -1]))[0] == "ruling1"


def test_uniform_j_met_on_quadric():
    m = builtin("P1xP1")
    v = check_criteria(m, m.cls([1, 1]), m.cls([1, 1]), "uniformJ")
    assert v.verdict == "criterion-met" and v.gamma == 1 and v.nef


def test_uniform_j_failing_curve_reported():
    m = builtin("P1xP1")
    v = check_criteria(m, m.cls([1, 1]), m.cls([3, 1]), "uniformJ")
    assert v.verdict == "criterion-not-met" and v.failing_curve is not None


def test_canonical_refused_on_negative_gamma():
    p2 = builtin("P2")
    v = check_criteria(p2, p2.cls([1]), None, "uniformK")
    assert v.gamma == -3
    assert v.verdict == "criterion-not-met" and v.reason == "gamma nonpositive"
    q = builtin("P1xP1")
    v = check_criteria(q, q.cls([1, 1]), q.canonical, "uniformJ")
    assert v.gamma == -2 and v.reason == "gamma nonpositive"


def test_gamma_zero_routing():
    m = builtin("P1xP1")
    v = check_criteria(m, m.cls([1, 1]), m.cls([1, -1]), "uniformJ")
    assert v.gamma == 0 and v.verdict == "criterion-not-met" and v.notes
    v = check_criteria(m, m.cls([1, 1]), m.cls([0, 0]), "kahlerCoercive")
    assert v.verdict == "bounded-below"


def test_jsemi_surface_factor():
    m = builtin("P1xP1")
    # gamma = 3/2, (4/3) gamma L1 - L2 = (2,2) - (2,1) nef, gamma L1 - L2 = (-1/2, 1/2) not nef
    assert check_criteria(m, m.cls([1, 1]), m.cls([2, 1]), "Jsemi").verdict == "criterion-met"
    assert check_criteria(m, m.cls([1, 1]), m.cls([2, 1]), "uniformJ").verdict == "criterion-not-met"


def test_no_klt_declines():
    p2 = builtin("P2")
    v = check_criteria(p2, p2.cls([1]), None, "uniformK", klt=False)
    assert v.verdict == "criterion-not-met"


def test_hirzebruch_fan():
    m = toric_surface_from_fan(parse_fan(F1_FAN))
    assert m.self_intersections == (0, -1, 0, 1)
    assert all(v == 0 for v in adjunction_defects(m).values())
    for i in range(4):
        e = [0] * 4
        e[i] = 1
        D = m.cls(e)
        assert m.intersect(m.canonical + D, D) == -2


def test_other_fans():
    assert toric_surface_from_fan(parse_fan("1,0;0,1;-1,-1")).self_intersections == (1, 1, 1)
    assert toric_surface_from_fan(parse_fan("1,0;0,1;-1,0;0,-1")).self_intersections == (0, 0, 0, 0)
    f2 = toric_surface_from_fan(parse_fan("1,0;0,1;-1,2;0,-1"))
    assert f2.self_intersections == (0, -2, 0, 2)


def test_bad_fans():
    with pytest.raises(CriteriaError):
        toric_surface_from_fan([(1, 0), (1, 1)])
    with pytest.raises(CriteriaError, match="not smooth"):
        toric_surface_from_fan([(1, 0), (1, 2), (-1, -1)])
    with pytest.raises(CriteriaError):
        parse_fan("1,a;0,1")


def test_float_classes_flagged():
    assert to_fraction(0.5) == (Fraction(1, 2), False)
    value, approx = to_fraction(0.1)
    assert value == Fraction(1, 10) and approx
    assert to_fraction(Fraction(2, 3)) == (Fraction(2, 3), False)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_gamma_exact_and_criterion_consistent(a, b, c, d):
    m = builtin("P1xP1")
    L1, L2 = m.cls([a, b]), m.cls([c, d])
    g = gamma(m, L1, L2)
    assert g == Fraction(a * d + b * c, 2 * a * b)
    v = check_criteria(m, L1, L2, "uniformJ")
    expected = g > 0 and g * a >= c and g * b >= d
    assert (v.verdict == "criterion-met") == expected
