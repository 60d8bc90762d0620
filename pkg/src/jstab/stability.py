"""Weights of test configurations generated by diagonal one-parameter subgroups.

Hilbert and weight polynomials come from exact standard-monomial counts
on the central fibre.  ``h``, ``w`` (and the derived ``a0, a1, b0, b1``) are
polynomials in the tensor power ``K`` of the embedding line bundle; the
divisor polynomials ``hhat``, ``what`` are in ``k = K*r``.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .polyalg import (
    Ideal,
    PolyAlgError,
    Polynomial,
    WeightVector,
    contains,
    fit_polynomial,
    graded_dimension,
    graded_weight,
    groebner_basis,
    initial_form,
    initial_ideal,
    monomials_of_degree,
    same_ideal,
)
from .qfield import QNumber, as_exact

_MAX_START = 4


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class TestConfiguration:
    ideal: Ideal
    weights: WeightVector
    r: int = 1
    n: int = 1

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if len(self.weights) != self.ideal.nvars:
            raise StabilityError(
                f"{len(self.weights)} weights for {self.ideal.nvars} homogeneous coordinates")
        if not self.weights.is_sorted():
            raise StabilityError("weights must be non-increasing")
        if self.r < 1:
            raise StabilityError("exponent r must be positive")

    @classmethod
    def create(cls, ideal: Ideal, weights, r: int = 1, n: Optional[int] = None, d: int = 0):
        if not isinstance(weights, WeightVector):
            weights = WeightVector.of(weights, d)
        if n is None:
            n = infer_dimension(ideal)
        return cls(ideal, weights, r, n)

    def with_weights(self, weights: WeightVector) -> "TestConfiguration":
        return TestConfiguration(self.ideal, weights, self.r, self.n)

    @property
    def is_trivial(self) -> bool:
        return self.weights.is_constant()


@dataclass(frozen=True)
class WeightData:
    h: Tuple[Fraction, ...]
    w: Tuple[object, ...]
    a0: Fraction
    a1: Fraction
    b0: object
    b1: object
    start: int = 1


@dataclass(frozen=True)
class DivisorWeightData:
    hhat: Tuple[Fraction, ...]
    what: Tuple[object, ...]
    ahat0: Fraction
    bhat0: object
    m: int
    start: int = 1


def infer_dimension(ideal: Ideal, max_start: int = _MAX_START) -> int:
    """Degree of the Hilbert polynomial (projective dimension)."""
    for deg in range(0, ideal.nvars):
        try:
            _fit_counts(lambda K: graded_dimension(ideal, K), deg, 1, max_start)
            return deg
        except PolyAlgError:
            continue
    raise StabilityError("could not determine the dimension of the variety")


def _fit_counts(value, degree: int, scale: int, max_start: int, extra: int = 2):
    """Fit ``value(K)`` sampled at ``k = scale*K`` for ``K = s..s+degree+extra``.

    Low degrees can sit below the regularity, so the window start ``s`` is
    raised until the extra samples verify.
    """
    last = None
    for s in range(1, max_start + 1):
        pts = [(scale * K, value(K)) for K in range(s, s + degree + 1 + extra)]
        try:
            return fit_polynomial(pts, degree), s
        except PolyAlgError as exc:
            last = exc
    raise PolyAlgError(str(last))


def _coeff(coeffs: Sequence, power: int):
    if power < 0 or power >= len(coeffs):
        return Fraction(0)
    return coeffs[power]


def weight_polynomials(tc: TestConfiguration) -> WeightData:
    n = tc.n
    central = initial_ideal(tc.ideal, tc.weights)
    h, s = _fit_counts(lambda K: graded_dimension(tc.ideal, K), n, 1, _MAX_START)
    w, _ = _fit_counts(lambda K: graded_weight(central, tc.weights, K), n + 1, 1, _MAX_START, extra=1)
    a0 = _coeff(h, n)
    if a0 <= 0 or len(h) != n + 1:
        raise StabilityError("Hilbert polynomial does not have the stated degree")
    return WeightData(
        h=tuple(h), w=tuple(as_exact(c) for c in w),
        a0=a0, a1=_coeff(h, n - 1),
        b0=as_exact(_coeff(w, n + 1)), b1=as_exact(_coeff(w, n)), start=s,
    )


def divisor_weight_polynomials(tc: TestConfiguration, g: Polynomial) -> DivisorWeightData:
    if g.nvars != tc.ideal.nvars:
        raise StabilityError("divisor equation lives in the wrong number of variables")
    if g.is_zero() or contains(tc.ideal, g):
        raise StabilityError("divisor contains component of M")
    m = tc.n - 1
    div = tc.ideal.plus(g)
    central = initial_ideal(div, tc.weights)
    hhat, s = _fit_counts(lambda K: graded_dimension(div, K), m, tc.r, _MAX_START)
    what, _ = _fit_counts(lambda K: graded_weight(central, tc.weights, K), m + 1, tc.r, _MAX_START, extra=1)
    ahat0 = _coeff(hhat, m)
    if ahat0 <= 0:
        raise StabilityError("divisor Hilbert polynomial has non-positive leading term")
    return DivisorWeightData(
        hhat=tuple(hhat), what=tuple(as_exact(c) for c in what),
        ahat0=ahat0, bhat0=as_exact(_coeff(what, m + 1)), m=m, start=s,
    )


def _level_values(tc: TestConfiguration):
    """``h(r)`` and ``w(r)``: dimension and weight of the sections of ``L^r``."""
    central = initial_ideal(tc.ideal, tc.weights)
    return graded_dimension(tc.ideal, 1), graded_weight(central, tc.weights, 1)


def chow_weight(tc: TestConfiguration, g: Polynomial):
    """Leading coefficient ``bhat0*r*h(r) - w(r)*ahat0`` of the twisted Chow weight."""
    div = divisor_weight_polynomials(tc, g)
    h_r, w_r = _level_values(tc)
    return as_exact(div.bhat0 * tc.r * h_r - w_r * div.ahat0)


def random_divisor(nvars: int, degree: int, rng: random.Random) -> Polynomial:
    """Random form with coefficients drawn from {-10..10} without 0."""
    choices = [c for c in range(-10, 11) if c != 0]
    terms = {m: Fraction(rng.choice(choices)) for m in monomials_of_degree(nvars, degree)}
    return Polynomial(terms, nvars)


@dataclass
class GenericValue:
    value: object
    counts: Dict[str, int] = field(default_factory=dict)
    samples: int = 0
    skipped: int = 0


def _majority(values: List, samples: int, skipped: int) -> GenericValue:
    tally = Counter(values)
    best, count = tally.most_common(1)[0]
    if 2 * count <= samples:
        raise StabilityError("generic value not resolved; increase samples")
    return GenericValue(best, {str(k): v for k, v in sorted(tally.items(), key=lambda kv: str(kv[0]))},
                        samples, skipped)


def _generic(tc: TestConfiguration, degree: int, samples: int, seed: int, fn) -> GenericValue:
    if samples < 3:
        raise StabilityError("need at least 3 samples")
    rng = random.Random(seed)
    values = []
    skipped = 0
    while len(values) < samples:
        g = random_divisor(tc.ideal.nvars, degree, rng)
        if contains(tc.ideal, g):
            skipped += 1
            if skipped > 10 * samples:
                raise StabilityError("every sampled divisor lies in the ideal")
            continue
        values.append(fn(g))
    return _majority(values, samples, skipped)


def chow_weight_linear_system(tc: TestConfiguration, degree: int = 1, samples: int = 5,
                              seed: int = 0) -> GenericValue:
    """Chow weight of a general member of the linear system of degree-``degree`` forms."""
    return _generic(tc, degree, samples, seed, lambda g: chow_weight(tc, g))


def _jweight_from(data: WeightData, div: DivisorWeightData, r: int):
    # convert the divisor coefficients back to the K variable
    ahat0 = div.ahat0 * r ** div.m
    bhat0 = div.bhat0 * r ** (div.m + 1)
    return as_exact((bhat0 * data.a0 - data.b0 * ahat0) / data.a0)


def j_weight(tc: TestConfiguration, g: Union[Polynomial, str] = "generic", degree: int = 1,
             samples: int = 5, seed: int = 0):
    data = weight_polynomials(tc)
    if isinstance(g, Polynomial):
        return _jweight_from(data, divisor_weight_polynomials(tc, g), tc.r)
    if g != "generic":
        raise StabilityError(f"unknown divisor {g!r}")
    return _generic(tc, degree, samples, seed,
                    lambda p: _jweight_from(data, divisor_weight_polynomials(tc, p), tc.r)).value


def minimum_norm(tc: TestConfiguration, samples: int = 5, seed: int = 0):
    """J-weight with L2 = L1.

    A hyperplane section lies in |L1^r|; the J-weight is linear in L2, so
    the hyperplane value is divided by r.
    """
    return as_exact(j_weight(tc, "generic", 1, samples, seed) / tc.r)


def df_invariant(tc: TestConfiguration):
    data = weight_polynomials(tc)
    return as_exact((data.b0 * data.a1 - data.b1 * data.a0) / data.a0)


# ---------------------------------------------------------------------------
# rational approximation of irrational weights
# ---------------------------------------------------------------------------

def weight_relations(ideal: Ideal, weights: WeightVector) -> List[Tuple[int, ...]]:
    """Integer relations among the weights forced by non-monomial initial forms."""
    rels = []
    for g in groebner_basis(ideal, weights):
        form = initial_form(g, weights)
        monos = sorted(form.terms)
        for other in monos[1:]:
            vec = tuple(a - b for a, b in zip(monos[0], other))
            if vec not in rels:
                rels.append(vec)
    return rels


def _sqrt_convergents(d: int, limit: int = 80):
    """Continued-fraction convergents of sqrt(d)."""
    a0 = math.isqrt(d)
    m, den, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    yield Fraction(p, q)
    for _ in range(limit):
        m = den * a - m
        den = (d - m * m) // den
        a = (a0 + m) // den
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield Fraction(p, q)


def rational_approximation(tc_or_ideal, weights: Optional[WeightVector] = None,
                           epsilon=Fraction(1, 10)) -> WeightVector:
    """Rational weights within ``epsilon`` that give the same central fibre.

    Substituting a rational ``q`` for ``sqrt(d)`` keeps every rational-linear
    relation the weights satisfy, including the ordering ties; strict
    inequalities survive once ``q`` is close enough, which is verified by
    recomputing the initial ideal.
    """
    if isinstance(tc_or_ideal, TestConfiguration):
        ideal, A = tc_or_ideal.ideal, tc_or_ideal.weights
    else:
        ideal, A = tc_or_ideal, weights
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise StabilityError("epsilon must be positive")
    if A.is_rational:
        return A
    d = A.d
    bmax = max(abs(e.b) for e in A.entries)
    target = initial_ideal(ideal, A)
    rels = weight_relations(ideal, A)
    root = QNumber(0, 1, d)
    for q in _sqrt_convergents(d):
        gap = q - root
        if (QNumber(epsilon / bmax) - (gap if gap > 0 else -gap)).sign() <= 0:
            continue
        cand = WeightVector(tuple(QNumber(e.a + e.b * q) for e in A.entries))
        if not cand.is_sorted():
            continue
        if any(cand.weight(tuple(max(x, 0) for x in v)) != cand.weight(tuple(max(-x, 0) for x in v))
               for v in rels):
            continue
        if same_ideal(initial_ideal(ideal, cand), target):
            return cand
    raise StabilityError("no rational point in Delta∩H within epsilon")


def verdicts(chow, jw, norm, df) -> Dict[str, object]:
    def sgn(x):
        return QNumber.coerce(x).sign()
    return {
        "chowPositive": sgn(chow) > 0 if chow is not None else None,
        "jPositive": sgn(jw) > 0,
        "jNonnegative": sgn(jw) >= 0,
        "dfPositive": sgn(df) > 0,
        "dfNonnegative": sgn(df) >= 0,
        "trivial": sgn(norm) == 0,
    }
