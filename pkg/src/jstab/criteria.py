"""Exact intersection numbers, nefness and the sufficient stability criteria.

Dimensions one and two only.  Divisor classes are coefficient vectors in a
model-specific basis; curves are tested through a finite list of generators
of the cone of curves (complete for toric surfaces).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

Number = Union[int, float, str, Fraction]


class CriteriaError(ValueError):
    pass


def to_fraction(x: Number) -> Tuple[Fraction, bool]:
    """Exact value and whether it had to be approximated."""
    if isinstance(x, Fraction):
        return x, False
    if isinstance(x, int):
        return Fraction(x), False
    if isinstance(x, str):
        return Fraction(x.strip()), False
    if isinstance(x, float):
        if not math.isfinite(x):
            raise CriteriaError("class coefficients must be finite")
        f = Fraction(x).limit_denominator(10 ** 12)
        return f, f != Fraction(x)
    raise CriteriaError(f"cannot read class coefficient {x!r}")


@dataclass(frozen=True)
class DivisorClass:
    coefficients: Tuple[Fraction, ...]
    approximate: bool = False

    @classmethod
    def of(cls, values: Sequence[Number]) -> "DivisorClass":
        pairs = [to_fraction(v) for v in values]
        return cls(tuple(v for v, _ in pairs), any(a for _, a in pairs))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)),
                            self.approximate or other.approximate)

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(tuple(-a for a in self.coefficients), self.approximate)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def scaled(self, c: Fraction) -> "DivisorClass":
        return DivisorClass(tuple(c * a for a in self.coefficients), self.approximate)

    def __len__(self):
        return len(self.coefficients)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coefficients) + ")"


@dataclass(frozen=True)
class IntersectionModel:
    """Intersection data on a curve (n = 1) or a surface (n = 2).

    ``form`` is the degree vector for n = 1 and the symmetric intersection
    matrix of the basis for n = 2.
    """

    name: str
    n: int
    basis: Tuple[str, ...]
    form: Tuple
    canonical: DivisorClass
    curves: Tuple[Tuple[str, DivisorClass], ...]
    toric: bool = False
    self_intersections: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.n == 2:
            M = self.form
            if any(M[i][j] != M[j][i] for i in range(len(M)) for j in range(len(M))):
                raise CriteriaError("intersection form must be symmetric")

    def cls(self, values: Sequence[Number]) -> DivisorClass:
        d = DivisorClass.of(values)
        if len(d) != len(self.basis):
            raise CriteriaError(f"{self.name} classes have {len(self.basis)} coefficients")
        return d

    def intersect(self, *classes: DivisorClass) -> Fraction:
        if len(classes) != self.n:
            raise CriteriaError(f"need {self.n} classes for a top intersection")
        if self.n == 1:
            return sum((Fraction(g) * c for g, c in zip(self.form, classes[0].coefficients)), Fraction(0))
        a, b = classes[0].coefficients, classes[1].coefficients
        m = len(a)
        return sum((a[i] * Fraction(self.form[i][j]) * b[j] for i in range(m) for j in range(m)), Fraction(0))

    def degree_on(self, D: DivisorClass, curve: DivisorClass) -> Fraction:
        if self.n == 1:
            return self.intersect(D)
        return self.intersect(D, curve)

    def power(self, D: DivisorClass) -> Fraction:
        return self.intersect(*([D] * self.n))

    def mixed(self, D: DivisorClass, L: DivisorClass) -> Fraction:
        """``D . L^(n-1)``."""
        return self.intersect(*([D] + [L] * (self.n - 1)))


def _point_class(size: int) -> DivisorClass:
    return DivisorClass(tuple(Fraction(0) for _ in range(size)))


def builtin(name: str) -> IntersectionModel:
    key = name.replace(" ", "").upper()
    if key == "P1":
        return IntersectionModel("P1", 1, ("H",), (1,), DivisorClass.of([-2]), (("P1", _point_class(1)),))
    if key == "P2":
        return IntersectionModel("P2", 2, ("H",), ((1,),), DivisorClass.of([-3]),
                                 (("line", DivisorClass.of([1])),))
    if key in ("P1XP1", "P1P1"):
        return IntersectionModel("P1xP1", 2, ("F1", "F2"), ((0, 1), (1, 0)), DivisorClass.of([-2, -2]),
                                 (("ruling1", DivisorClass.of([1, 0])), ("ruling2", DivisorClass.of([0, 1]))))
    raise CriteriaError(f"unknown built-in model {name!r}")


def _det(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def toric_surface_from_fan(rays: Sequence[Sequence[int]], name: str = "toric") -> IntersectionModel:
    """Smooth complete toric surface from counterclockwise primitive rays."""
    rays = [tuple(int(c) for c in v) for v in rays]
    m = len(rays)
    if m < 3:
        raise CriteriaError("a complete fan needs at least three rays")
    for v in rays:
        if len(v) != 2 or math.gcd(abs(v[0]), abs(v[1])) != 1:
            raise CriteriaError(f"ray {v} is not a primitive integer 2-vector")
    winding = 0.0
    for i in range(m):
        u, v = rays[i], rays[(i + 1) % m]
        if _det(u, v) != 1:
            raise CriteriaError(f"cone ({u}, {v}) is not smooth (determinant {_det(u, v)})")
        winding += math.atan2(_det(u, v), u[0] * v[0] + u[1] * v[1])
    if abs(winding - 2 * math.pi) > 1e-9:
        raise CriteriaError("rays do not wind once around the origin: fan incomplete")
    a = []
    for i in range(m):
        prev, nxt, v = rays[i - 1], rays[(i + 1) % m], rays[i]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        # smoothness makes s an integer multiple of v
        k = s[0] // v[0] if v[0] else s[1] // v[1]
        if (k * v[0], k * v[1]) != s:
            raise CriteriaError("fan relation failed")
        a.append(k)
    M = [[0] * m for _ in range(m)]
    for i in range(m):
        M[i][i] = -a[i]
        M[i][(i + 1) % m] = M[(i + 1) % m][i] = 1
    basis = tuple(f"D{i}" for i in range(m))
    curves = []
    for i in range(m):
        e = [0] * m
        e[i] = 1
        curves.append((basis[i], DivisorClass.of(e)))
    return IntersectionModel(name, 2, basis, tuple(tuple(r) for r in M), DivisorClass.of([-1] * m),
                             tuple(curves), toric=True, self_intersections=tuple(-x for x in a))


def parse_fan(text: str) -> List[Tuple[int, int]]:
    """``"1,0;0,1;-1,1;0,-1"`` -> list of rays."""
    try:
        return [tuple(int(c) for c in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError as exc:
        raise CriteriaError(f"cannot parse fan {text!r}") from exc


# ---------------------------------------------------------------------------
# gamma and nefness
# ---------------------------------------------------------------------------

def is_ample(model: IntersectionModel, L: DivisorClass) -> bool:
    if model.power(L) <= 0:
        return False
    return all(model.degree_on(L, c) > 0 for _, c in model.curves)


def gamma(model: IntersectionModel, L1: DivisorClass, L2: DivisorClass) -> Fraction:
    """``L2 . L1^(n-1) / L1^n``."""
    if not is_ample(model, L1):
        raise CriteriaError("L1 not big/ample")
    return model.mixed(L2, L1) / model.power(L1)


def failing_curve(model: IntersectionModel, D: DivisorClass) -> Optional[Tuple[str, Fraction]]:
    for name, c in model.curves:
        deg = model.degree_on(D, c)
        if deg < 0:
            return name, deg
    return None


def is_nef(model: IntersectionModel, D: DivisorClass) -> bool:
    return failing_curve(model, D) is None


def adjunction_defects(model: IntersectionModel) -> Dict[str, Fraction]:
    """``(K + C) . C + 2`` for every generator curve (zero for smooth rational curves)."""
    if model.n != 2:
        raise CriteriaError("adjunction check needs a surface")
    return {name: model.intersect(model.canonical + c, c) + 2 for name, c in model.curves}


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------

MODES = ("uniformJ", "Jsemi", "uniformK", "kahlerCoercive")

_LABELS = {
    "uniformJ": "sufficient condition for uniform J-stability (gamma > 0, gamma L1 - L2 nef)",
    "Jsemi": "sufficient condition for J-semistability (gamma >= 0; surfaces use 4/3 gamma L1 - L2)",
    "uniformK": "sufficient condition for uniform K-stability of klt (M, L1) via L2 = K_M",
    "kahlerCoercive": "sufficient condition for coercivity of the J-hat functional (Kahler classes)",
}


@dataclass
class Verdict:
    gamma: Fraction
    nef: bool
    failing_curve: Optional[str]
    verdict: str
    reason: str
    citation: str
    tested_class: DivisorClass
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "gamma": str(self.gamma),
            "nef": self.nef,
            "failingCurve": self.failing_curve,
            "verdict": self.verdict,
            "reason": self.reason,
            "citation": self.citation,
            "testedClass": str(self.tested_class),
            "notes": list(self.notes),
        }


def _nef_verdict(model, g, D, mode, ok_verdict, ok_reason, notes) -> Verdict:
    bad = failing_curve(model, D)
    if D.approximate:
        notes.append("class coefficients were rationally approximated")
        if any(model.degree_on(D, c) == 0 for _, c in model.curves):
            notes.append("tested class lies on the nef boundary; approximation may decide the verdict")
    if model.curves and not model.toric and model.n == 2 and model.name not in ("P2", "P1xP1"):
        notes.append("curve list assumed to generate the cone of curves")
    if bad is None:
        return Verdict(g, True, None, ok_verdict, ok_reason, _LABELS[mode], D, notes)
    return Verdict(g, False, bad[0], "criterion-not-met",
                   f"tested class has degree {bad[1]} on curve {bad[0]}", _LABELS[mode], D, notes)


def check_criteria(model: IntersectionModel, L1: DivisorClass, L2: Optional[DivisorClass], mode: str,
                   klt: bool = True) -> Verdict:
    """Evaluate one sufficient criterion.  ``criterion-not-met`` never means instability."""
    if mode not in MODES:
        raise CriteriaError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    notes: List[str] = []
    if mode == "uniformK":
        if not klt:
            return Verdict(Fraction(0), False, None, "criterion-not-met", "klt hypothesis not asserted",
                           _LABELS[mode], model.canonical, notes)
        L2 = model.canonical
    if L2 is None:
        raise CriteriaError("L2 required for this mode")
    g = gamma(model, L1, L2)
    n = model.n

    if mode == "uniformJ":
        D = L1.scaled(g) - L2
        if g <= 0:
            if g == 0:
                notes.append("gamma = 0 belongs to the semistable branch (mode Jsemi)")
            return Verdict(g, is_nef(model, D), None, "criterion-not-met", "gamma nonpositive",
                           _LABELS[mode], D, notes)
        return _nef_verdict(model, g, D, mode, "criterion-met", "gamma > 0 and gamma L1 - L2 nef", notes)

    if mode in ("Jsemi", "uniformK"):
        c = Fraction(4, 3) if n == 2 else Fraction(1)
        D = L1.scaled(c * g) - L2
        if g < 0:
            return Verdict(g, is_nef(model, D), None, "criterion-not-met", "gamma nonpositive",
                           _LABELS[mode], D, notes)
        if g == 0 and mode == "uniformK":
            notes.append("gamma = 0 with -K_M nef: Calabi-Yau case")
        if n == 1:
            notes.append("curves: gamma L1 - L2 is numerically trivial")
        label = "(4/3) gamma L1 - L2 nef" if n == 2 else "gamma L1 - L2 nef"
        return _nef_verdict(model, g, D, mode, "criterion-met", f"gamma >= 0 and {label}", notes)

    # kahlerCoercive
    D = L1.scaled(g) - L2
    if g < 0:
        return Verdict(g, is_nef(model, D), None, "criterion-not-met", "gamma nonpositive", _LABELS[mode], D, notes)
    if g == 0:
        v = _nef_verdict(model, g, D, mode, "bounded-below", "gamma = 0 and -[chi] nef", notes)
        return v
    return _nef_verdict(model, g, D, mode, "criterion-met", "gamma > 0 and gamma[omega] - [chi] nef", notes)
