"""Exact homogeneous polynomial algebra with weight-refined term orders.

A monomial is a tuple of exponents, one per homogeneous coordinate
``Z0..ZN``.  Coefficients are :class:`fractions.Fraction`.  The term order
used everywhere puts monomials of *smallest* weight first and breaks ties
with graded reverse lexicographic order, so the leading form of a
polynomial is its initial form in the flat-limit sense.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, List, Sequence, Tuple

from .qfield import QNumber

Monomial = Tuple[int, ...]


class PolyAlgError(ValueError):
    pass


def flow_sign_convention() -> int:
    """Sign relating weight vectors to the geodesic direction.

    Returns ``+1``: a diagonal matrix ``A`` weights the monomial ``Z^m`` by
    ``sum(A_i m_i)``, initial forms keep the minimum-weight terms, and the
    same ``A`` drives the Bergman geodesic ``H(t) = exp(-tA) H0 exp(-tA)``
    whose ``t -> +inf`` limit cycle is cut out by that initial ideal.
    """
    return 1


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

def monomials_of_degree(nvars: int, degree: int) -> List[Monomial]:
    """All exponent tuples of the given total degree, grevlex-descending."""
    out = []
    for cuts in itertools.combinations(range(degree + nvars - 1), nvars - 1):
        prev = -1
        exps = []
        for c in cuts:
            exps.append(c - prev - 1)
            prev = c
        exps.append(degree + nvars - 2 - prev)
        out.append(tuple(exps))
    out.sort(key=_grevlex_key, reverse=True)
    return out


def _grevlex_key(m: Monomial):
    return (sum(m), tuple(-e for e in reversed(m)))


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"\s*([+-]?)\s*([^+-]+)")
_VAR_RE = re.compile(r"^Z(\d+)(?:\^(\d+))?$")


class Polynomial:
    """Homogeneous polynomial with exact rational coefficients (immutable)."""

    __slots__ = ("terms", "nvars", "_hash")

    def __init__(self, terms: Dict[Monomial, Fraction], nvars: int):
        clean = {}
        for m, c in terms.items():
            c = Fraction(c)
            if c != 0:
                if len(m) != nvars:
                    raise PolyAlgError(f"monomial {m} does not have {nvars} exponents")
                clean[tuple(m)] = c
        degrees = {sum(m) for m in clean}
        if len(degrees) > 1:
            raise PolyAlgError(f"polynomial is not homogeneous (degrees {sorted(degrees)})")
        self.terms = clean
        self.nvars = nvars
        self._hash = None

    # -- basic properties ---------------------------------------------
    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return sum(next(iter(self.terms)))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out, self.nvars)

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()}, self.nvars)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        return Polynomial({m: c * v for m, v in self.terms.items()}, self.nvars)

    def shift(self, mono: Monomial) -> "Polynomial":
        """Multiply by the monomial ``Z^mono``."""
        return Polynomial({_add(m, mono): c for m, c in self.terms.items()}, self.nvars)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _add(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out, self.nvars)

    def power(self, e: int) -> "Polynomial":
        out = Polynomial.monomial((0,) * self.nvars)
        for _ in range(e):
            out = out * self
        return out

    @classmethod
    def monomial(cls, m: Monomial, c=1) -> "Polynomial":
        return cls({tuple(m): Fraction(c)}, len(m))

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        m = [0] * nvars
        m[i] = 1
        return cls.monomial(tuple(m))

    # -- text form ----------------------------------------------------
    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> "Polynomial":
        s = text.strip()
        if not s:
            raise PolyAlgError("empty polynomial text")
        raw: List[Tuple[Fraction, Dict[int, int]]] = []
        pos = 0
        for match in _TERM_RE.finditer(s):
            if match.start() != pos and s[pos:match.start()].strip():
                raise PolyAlgError(f"cannot parse {text!r}")
            pos = match.end()
            sign, body = match.groups()
            coeff = Fraction(-1 if sign == "-" else 1)
            exps: Dict[int, int] = {}
            for factor in body.strip().split("*"):
                factor = factor.strip()
                if not factor:
                    raise PolyAlgError(f"empty factor in {text!r}")
                vm = _VAR_RE.match(factor)
                if vm:
                    idx = int(vm.group(1))
                    exps[idx] = exps.get(idx, 0) + int(vm.group(2) or 1)
                else:
                    try:
                        coeff *= Fraction(factor)
                    except (ValueError, ZeroDivisionError) as exc:
                        raise PolyAlgError(f"bad factor {factor!r} in {text!r}") from exc
            raw.append((coeff, exps))
        if s[pos:].strip():
            raise PolyAlgError(f"trailing text in {text!r}")
        top = max((max(e) for _, e in raw if e), default=-1) + 1
        n = nvars if nvars is not None else max(top, 1)
        if top > n:
            raise PolyAlgError(f"{text!r} uses Z{top - 1} but only {n} variables")
        terms: Dict[Monomial, Fraction] = {}
        for coeff, exps in raw:
            m = tuple(exps.get(i, 0) for i in range(n))
            terms[m] = terms.get(m, 0) + coeff
        return cls(terms, n)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m in sorted(self.terms, key=_grevlex_key, reverse=True):
            c = self.terms[m]
            factors = []
            for i, e in enumerate(m):
                if e == 1:
                    factors.append(f"Z{i}")
                elif e > 1:
                    factors.append(f"Z{i}^{e}")
            mag = abs(c)
            if mag != 1 or not factors:
                factors.insert(0, str(mag))
            body = "*".join(factors)
            if not pieces:
                pieces.append(("-" if c < 0 else "") + body)
            else:
                pieces.append(("- " if c < 0 else "+ ") + body)
        return " ".join(pieces)

    def __repr__(self):
        return f"Polynomial({str(self)!r}, nvars={self.nvars})"


# ---------------------------------------------------------------------------
# weights and ideals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightVector:
    """Diagonal weights ``(lambda_0, ..., lambda_N)`` in Q or Q(sqrt d)."""

    entries: Tuple[QNumber, ...]
    d: int = 0

    def __post_init__(self):
        ents = tuple(QNumber.coerce(e) for e in self.entries)
        radicands = {e.d for e in ents if e.d}
        if len(radicands) > 1:
            raise PolyAlgError("at most one irrational generator per weight vector")
        d = radicands.pop() if radicands else 0
        object.__setattr__(self, "entries", ents)
        object.__setattr__(self, "d", d)

    @classmethod
    def of(cls, values: Iterable, d: int = 0) -> "WeightVector":
        ents = []
        for v in values:
            if isinstance(v, str):
                ents.append(QNumber.parse(v, d))
            else:
                ents.append(QNumber.coerce(v))
        return cls(tuple(ents), d)

    @classmethod
    def zero(cls, n: int) -> "WeightVector":
        return cls(tuple(QNumber(0) for _ in range(n)))

    def __len__(self):
        return len(self.entries)

    def weight(self, m: Monomial) -> QNumber:
        total = QNumber(0)
        for e, lam in zip(m, self.entries):
            if e:
                total = total + lam * e
        return total

    def shifted(self, c) -> "WeightVector":
        return WeightVector(tuple(e + c for e in self.entries), self.d)

    def scaled(self, q) -> "WeightVector":
        return WeightVector(tuple(e * q for e in self.entries), self.d)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __neg__(self):
        return WeightVector(tuple(-e for e in self.entries), self.d)

    @property
    def is_rational(self) -> bool:
        return all(e.is_rational for e in self.entries)

    def is_sorted(self) -> bool:
        return all(self.entries[i] >= self.entries[i + 1] for i in range(len(self) - 1))

    def is_constant(self) -> bool:
        return all(e == self.entries[0] for e in self.entries)

    def floats(self) -> List[float]:
        return [float(e) for e in self.entries]

    def __str__(self):
        return "(" + ", ".join(str(e) for e in self.entries) + ")"


@dataclass(frozen=True)
class Ideal:
    generators: Tuple[Polynomial, ...]
    nvars: int

    def __post_init__(self):
        gens = tuple(g for g in self.generators if not g.is_zero())
        for g in gens:
            if g.nvars != self.nvars:
                raise PolyAlgError("generator in the wrong number of variables")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def parse(cls, texts: Sequence[str], nvars: int | None = None) -> "Ideal":
        polys = [Polynomial.parse(t) for t in texts]
        n = nvars if nvars is not None else max([p.nvars for p in polys] or [1])
        return cls(tuple(Polynomial.parse(t, n) for t in texts), n)

    @classmethod
    def from_json(cls, text: str, nvars: int | None = None) -> "Ideal":
        return cls.parse(json.loads(text), nvars)

    def to_json(self) -> str:
        return json.dumps([str(g) for g in self.generators])

    @classmethod
    def zero(cls, nvars: int) -> "Ideal":
        return cls((), nvars)

    def plus(self, *polys: Polynomial) -> "Ideal":
        return Ideal(self.generators + tuple(polys), self.nvars)


# ---------------------------------------------------------------------------
# term order and reduction
# ---------------------------------------------------------------------------

class TermOrder:
    """Minimum-weight-first order refined by grevlex."""

    def __init__(self, weights: WeightVector):
        self.weights = weights
        self._cache: Dict[Monomial, tuple] = {}

    def key(self, m: Monomial):
        k = self._cache.get(m)
        if k is None:
            k = (-self.weights.weight(m), _grevlex_key(m))
            self._cache[m] = k
        return k

    def leading(self, f: Polynomial | Dict[Monomial, Fraction]) -> Monomial:
        terms = f.terms if isinstance(f, Polynomial) else f
        return max(terms, key=self.key)


def _monic(f: Polynomial, order: TermOrder) -> Polynomial:
    lc = f.terms[order.leading(f)]
    return f.scale(1 / lc)


def reduce(f: Polynomial, basis: Sequence[Polynomial], order: TermOrder) -> Polynomial:
    """Full normal form of ``f`` modulo ``basis`` (leading terms must be monic)."""
    leads = [(order.leading(g), g) for g in basis]
    work = dict(f.terms)
    rem: Dict[Monomial, Fraction] = {}
    while work:
        lm = max(work, key=order.key)
        lc = work[lm]
        for gm, g in leads:
            if _divides(gm, lm):
                q = _sub(lm, gm)
                for m, c in g.terms.items():
                    mm = _add(m, q)
                    v = work.get(mm, 0) - lc * c
                    if v:
                        work[mm] = v
                    else:
                        work.pop(mm, None)
                break
        else:
            rem[lm] = lc
            del work[lm]
    return Polynomial(rem, f.nvars)


def _spoly(f: Polynomial, g: Polynomial, order: TermOrder) -> Polynomial:
    lf, lg = order.leading(f), order.leading(g)
    l = _lcm(lf, lg)
    return f.shift(_sub(l, lf)).scale(1 / f.terms[lf]) - g.shift(_sub(l, lg)).scale(1 / g.terms[lg])


@lru_cache(maxsize=512)
def _groebner_cached(gens: Tuple[Polynomial, ...], nvars: int, weights: WeightVector) -> Tuple[Polynomial, ...]:
    order = TermOrder(weights)
    basis: List[Polynomial] = []
    for g in gens:
        r = reduce(g, basis, order)
        if not r.is_zero():
            basis.append(_monic(r, order))
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    while pairs:
        # lowest-degree pair first keeps the homogeneous computation tidy
        pairs.sort(key=lambda p: sum(_lcm(order.leading(basis[p[0]]), order.leading(basis[p[1]]))))
        i, j = pairs.pop(0)
        li, lj = order.leading(basis[i]), order.leading(basis[j])
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue  # coprime leading monomials
        r = reduce(_spoly(basis[i], basis[j], order), basis, order)
        if not r.is_zero():
            basis.append(_monic(r, order))
            k = len(basis) - 1
            pairs.extend((m, k) for m in range(k))
    # minimise
    leads = [order.leading(g) for g in basis]
    keep = []
    for i, g in enumerate(basis):
        redundant = False
        for j, lj in enumerate(leads):
            if j == i:
                continue
            if _divides(lj, leads[i]) and (lj != leads[i] or j < i):
                redundant = True
                break
        if not redundant:
            keep.append(g)
    # interreduce
    reduced = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1:]
        reduced.append(_monic(reduce(g, others, order), order))
    reduced.sort(key=lambda g: order.key(order.leading(g)), reverse=True)
    return tuple(reduced)


def groebner_basis(ideal: Ideal, weights: WeightVector | None = None) -> List[Polynomial]:
    """Reduced Groebner basis for the min-weight order refined by grevlex."""
    if weights is None:
        weights = WeightVector.zero(ideal.nvars)
    if len(weights) != ideal.nvars:
        raise PolyAlgError(f"weight vector has {len(weights)} entries for {ideal.nvars} variables")
    return list(_groebner_cached(ideal.generators, ideal.nvars, weights))


def initial_form(f: Polynomial, weights: WeightVector) -> Polynomial:
    """Sum of the terms of ``f`` of minimum weight."""
    if f.is_zero():
        raise PolyAlgError("empty polynomial")
    ws = {m: weights.weight(m) for m in f.terms}
    low = min(ws.values())
    return Polynomial({m: c for m, c in f.terms.items() if ws[m] == low}, f.nvars)


def initial_ideal(ideal: Ideal, weights: WeightVector) -> Ideal:
    """Ideal of the central fibre: initial forms of a weight-order Groebner basis."""
    gb = groebner_basis(ideal, weights)
    return Ideal(tuple(initial_form(g, weights) for g in gb), ideal.nvars)


def same_ideal(a: Ideal, b: Ideal) -> bool:
    """Equality of ideals via reduced grevlex Groebner bases."""
    if a.nvars != b.nvars:
        return False
    return groebner_basis(a) == groebner_basis(b)


def contains(ideal: Ideal, f: Polynomial) -> bool:
    order = TermOrder(WeightVector.zero(ideal.nvars))
    return reduce(f, groebner_basis(ideal), order).is_zero()


# ---------------------------------------------------------------------------
# graded counting
# ---------------------------------------------------------------------------

def standard_monomials(ideal: Ideal, K: int, weights: WeightVector | None = None) -> List[Monomial]:
    gb = groebner_basis(ideal, weights)
    order = TermOrder(weights or WeightVector.zero(ideal.nvars))
    leads = [order.leading(g) for g in gb]
    return [m for m in monomials_of_degree(ideal.nvars, K) if not any(_divides(l, m) for l in leads)]


def graded_dimension(ideal: Ideal, K: int) -> int:
    """Dimension of the degree-K piece of the quotient ring."""
    if K < 0:
        raise PolyAlgError("degree must be non-negative")
    if not ideal.generators:
        return comb(K + ideal.nvars - 1, ideal.nvars - 1)
    return len(standard_monomials(ideal, K))


def is_weight_homogeneous(ideal: Ideal, weights: WeightVector) -> bool:
    for g in groebner_basis(ideal, weights):
        ws = {weights.weight(m) for m in g.terms}
        if len(ws) > 1:
            return False
    return True


def graded_weight(ideal0: Ideal, weights: WeightVector, K: int):
    """Trace of the weight action on the degree-K piece of the quotient."""
    if K < 0:
        raise PolyAlgError("degree must be non-negative")
    if not is_weight_homogeneous(ideal0, weights):
        raise PolyAlgError("incompatible weight: ideal is not weight-homogeneous")
    total = QNumber(0)
    for m in standard_monomials(ideal0, K, weights):
        total = total + weights.weight(m)
    return total


# ---------------------------------------------------------------------------
# exact interpolation
# ---------------------------------------------------------------------------

def fit_polynomial(points: Sequence[Tuple[int, object]], degree: int) -> List:
    """Exact interpolating polynomial, coefficients lowest degree first.

    Extra points beyond ``degree + 1`` are checked to lie on the fit.
    """
    pts = [(Fraction(x), y) for x, y in points]
    if len(pts) < degree + 1:
        raise PolyAlgError(f"need {degree + 1} points, got {len(pts)}")
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise PolyAlgError("abscissae must be distinct")
    base = pts[: degree + 1]
    # Newton divided differences
    coef = [y for _, y in base]
    for j in range(1, degree + 1):
        for i in range(degree, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (base[i][0] - base[i - j][0])
    # expand the Newton form into monomial coefficients
    poly = [coef[degree]]
    for i in range(degree - 1, -1, -1):
        xi = base[i][0]
        new = [0] * (len(poly) + 1)
        for p, c in enumerate(poly):
            new[p + 1] = new[p + 1] + c
            new[p] = new[p] - c * xi
        new[0] = new[0] + coef[i]
        poly = new
    poly = poly[: degree + 1]
    poly = [_normalise(c) for c in poly]
    for x, y in pts[degree + 1:]:
        if evaluate(poly, x) != y:
            raise PolyAlgError("not a polynomial of stated degree")
    return poly


def _normalise(c):
    if isinstance(c, QNumber):
        return c
    return Fraction(c)


def evaluate(coeffs: Sequence, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
