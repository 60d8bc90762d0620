"""Model manifolds P1, P2, P1xP1 with monomial sections and quadrature.

Points are parametrised by angles: on each P1 factor ``z = tan(u) e^{i theta}``
with Gauss-Legendre nodes in ``u`` and equispaced ``theta``.  Forms are stored
as complex Hessians ``g[a, b] = d_a dbar_b psi`` in affine coordinates, with
the normalisation ``omega = (i / 2 pi) ddbar psi`` so that ``int c1(O(1)) = 1``.
Quadrature weights integrate against the reference volume form, so densities
are always ratios against ``omega_ref^n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

KINDS = ("P1", "P2", "P1xP1")


class GeometryError(ValueError):
    pass


def _degrees(kind: str, d) -> Tuple[int, ...]:
    if isinstance(d, (int, np.integer)):
        d = (int(d),)
    d = tuple(int(x) for x in d)
    want = 2 if kind == "P1xP1" else 1
    if len(d) == 1 and want == 2:
        d = d * 2
    if len(d) != want:
        raise GeometryError(f"{kind} needs {want} degree entries, got {len(d)}")
    return d


@dataclass(frozen=True)
class ModelManifold:
    kind: str
    d1: Tuple[int, ...]
    d2: Tuple[int, ...]
    quad_order: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeometryError(f"unknown model kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "d1", _degrees(self.kind, self.d1))
        object.__setattr__(self, "d2", _degrees(self.kind, self.d2))
        if min(self.d1) < 1:
            raise GeometryError("L1 must be ample (all degrees >= 1)")
        if self.quad_order < 4:
            raise GeometryError("quadrature order must be at least 4")

    @classmethod
    def create(cls, kind: str, d1=1, d2=None, quad_order: int = 64) -> "ModelManifold":
        return cls(kind, d1, d1 if d2 is None else d2, quad_order)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelManifold":
        return cls.create(data["kind"], data.get("d1", 1), data.get("d2"), int(data.get("quadOrder", 64)))

    @classmethod
    def from_json(cls, text: str) -> "ModelManifold":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d1": list(self.d1), "d2": list(self.d2), "quadOrder": self.quad_order}

    @property
    def n(self) -> int:
        return 1 if self.kind == "P1" else 2

    @property
    def circles(self) -> int:
        """Number of torus factors (one angle per affine coordinate)."""
        return self.n

    def with_d2(self, d2) -> "ModelManifold":
        return ModelManifold(self.kind, self.d1, d2, self.quad_order)

    def with_order(self, order: int) -> "ModelManifold":
        return ModelManifold(self.kind, self.d1, self.d2, order)

    # exact intersection numbers in the c1-normalisation
    def _pair(self, a: Sequence[int], b: Sequence[int]) -> Fraction:
        if self.kind == "P1":
            return Fraction(a[0])
        if self.kind == "P2":
            return Fraction(a[0] * b[0])
        return Fraction(a[0] * b[1] + a[1] * b[0])

    @property
    def volume(self) -> Fraction:
        """``L1^n``."""
        return self._pair(self.d1, self.d1)

    @property
    def chi_class_integral(self) -> Fraction:
        """``L2 . L1^(n-1)``."""
        if self.kind == "P1":
            return Fraction(self.d2[0])
        return self._pair(self.d2, self.d1)

    @property
    def gamma(self) -> Fraction:
        return self.chi_class_integral / self.volume

    def section_exponents(self, k: int) -> List[Tuple[int, ...]]:
        """Affine exponents of the monomial basis of H^0(L1^k)."""
        if k < 1:
            raise GeometryError("tensor power k must be >= 1")
        if self.kind == "P1":
            return [(j,) for j in range(self.d1[0] * k + 1)]
        if self.kind == "P2":
            m = self.d1[0] * k
            return [(a, b) for a in range(m + 1) for b in range(m + 1 - a)]
        return [(a, b) for a in range(self.d1[0] * k + 1) for b in range(self.d1[1] * k + 1)]

    def section_count(self, k: int) -> int:
        if self.kind == "P1":
            return self.d1[0] * k + 1
        if self.kind == "P2":
            return comb(self.d1[0] * k + 2, 2)
        return (self.d1[0] * k + 1) * (self.d1[1] * k + 1)

    def default_angles(self, k: int) -> int:
        return 8 * max(self.d1) * k + 8


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    z: np.ndarray        # (P, n) complex affine coordinates
    x: np.ndarray        # (P, n) reference moment coordinates
    weights: np.ndarray  # (P,) reference volume weights, sum = L1^n
    order: int
    angles: int

    def __len__(self):
        return len(self.weights)


def _gauss(order: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


@lru_cache(maxsize=32)
def _rule(kind: str, d1: Tuple[int, ...], order: int, angles: int) -> QuadratureRule:
    u, wu = _gauss(order, 0.0, np.pi / 2)
    theta = 2 * np.pi * np.arange(angles) / angles
    wt = np.full(angles, 1.0 / angles)
    if kind == "P1":
        U, T = np.meshgrid(u, theta, indexing="ij")
        W = np.outer(wu * np.sin(2 * u), wt) * d1[0]
        z = (np.tan(U) * np.exp(1j * T)).reshape(-1, 1)
        x = (np.sin(U) ** 2).reshape(-1, 1)
        return QuadratureRule(z, x, W.reshape(-1), order, angles)
    if kind == "P1xP1":
        one = _rule("P1", (1,), order, angles)
        P = len(one)
        i, j = np.meshgrid(np.arange(P), np.arange(P), indexing="ij")
        i, j = i.reshape(-1), j.reshape(-1)
        z = np.stack([one.z[i, 0], one.z[j, 0]], axis=1)
        x = np.stack([one.x[i, 0], one.x[j, 0]], axis=1)
        W = 2 * d1[0] * d1[1] * one.weights[i] * one.weights[j]
        return QuadratureRule(z, x, W, order, angles)
    # P2: z1 = tan u cos v e^{i t1}, z2 = tan u sin v e^{i t2}
    v, wv = u, wu
    U, V, T1, T2 = np.meshgrid(u, v, theta, theta, indexing="ij")
    W = (wu * np.sin(2 * u) * np.sin(u) ** 2)[:, None, None, None] \
        * (wv * np.sin(2 * v))[None, :, None, None] * wt[None, None, :, None] * wt[None, None, None, :]
    W = 2 * d1[0] ** 2 * W
    r = np.tan(U)
    z = np.stack([(r * np.cos(V) * np.exp(1j * T1)).reshape(-1), (r * np.sin(V) * np.exp(1j * T2)).reshape(-1)], axis=1)
    s = np.sin(U) ** 2
    x = np.stack([(s * np.cos(V) ** 2).reshape(-1), (s * np.sin(V) ** 2).reshape(-1)], axis=1)
    return QuadratureRule(z, x, W.reshape(-1), order, angles)


def quadrature_rule(model: ModelManifold, order: Optional[int] = None, angles: int = 1) -> QuadratureRule:
    """Tensor rule; ``angles = 1`` is exact for torus-invariant integrands."""
    return _rule(model.kind, model.d1, order or model.quad_order, angles)


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionBasis:
    k: int
    monomials: Tuple[Tuple[int, ...], ...]
    norm_squares: Tuple[Fraction, ...]

    @property
    def gram(self) -> np.ndarray:
        return np.diag([float(v) for v in self.norm_squares]).astype(complex)

    def __len__(self):
        return len(self.monomials)


def section_basis(model: ModelManifold, k: int) -> SectionBasis:
    """Monomial sections with exact reference L2 norms (Beta/Dirichlet integrals).

    The norm is ``int |s|^2_{h_ref^k} omega_ref^n``.
    """
    mons = model.section_exponents(k)
    norms = []
    if model.kind == "P1":
        m = model.d1[0] * k
        for (j,) in mons:
            norms.append(Fraction(model.d1[0] * factorial(j) * factorial(m - j), factorial(m + 1)))
    elif model.kind == "P2":
        m = model.d1[0] * k
        for a, b in mons:
            c = m - a - b
            norms.append(Fraction(2 * model.d1[0] ** 2 * factorial(a) * factorial(b) * factorial(c), factorial(m + 2)))
    else:
        m1, m2 = model.d1[0] * k, model.d1[1] * k
        for a, b in mons:
            norms.append(Fraction(2 * model.d1[0] * model.d1[1] * factorial(a) * factorial(m1 - a) * factorial(b)
                                  * factorial(m2 - b), factorial(m1 + 1) * factorial(m2 + 1)))
    return SectionBasis(k, tuple(mons), tuple(norms))


def _ref_scale(model: ModelManifold, z: np.ndarray, k: int) -> np.ndarray:
    """``|e|_{h_ref^k}`` of the affine frame, used to keep sections bounded."""
    s = np.abs(z) ** 2
    if model.kind == "P1":
        return (1 + s[:, 0]) ** (-0.5 * model.d1[0] * k)
    if model.kind == "P2":
        return (1 + s[:, 0] + s[:, 1]) ** (-0.5 * model.d1[0] * k)
    return (1 + s[:, 0]) ** (-0.5 * model.d1[0] * k) * (1 + s[:, 1]) ** (-0.5 * model.d1[1] * k)


def sections_at(model: ModelManifold, k: int, rule: QuadratureRule):
    """Section values ``S (P, N+1)`` and derivatives ``dS (P, n, N+1)``.

    Both are multiplied by the reference frame norm; every quantity built
    from them here is homogeneous of degree zero in that factor except the
    potential, which then comes out relative to ``h_ref``.
    """
    mons = np.array(model.section_exponents(k))
    z = rule.z
    n = model.n
    c = _ref_scale(model, z, k)
    S = np.ones((len(z), len(mons)), dtype=complex)
    for a in range(n):
        S *= z[:, a:a + 1] ** mons[None, :, a]
    dS = np.empty((len(z), n, len(mons)), dtype=complex)
    for a in range(n):
        e = mons[:, a]
        lower = np.where(e > 0, e - 1, 0)
        term = e[None, :] * z[:, a:a + 1] ** lower[None, :]
        for b in range(n):
            if b != a:
                term = term * z[:, b:b + 1] ** mons[None, :, b]
        dS[:, a, :] = term
    return S * c[:, None], dS * c[:, None, None]


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

def reference_form(model: ModelManifold, rule: QuadratureRule, degrees=None) -> np.ndarray:
    """Complex Hessian of ``sum_i d_i log(1 + |z|^2)``-type reference potentials."""
    d = model.d1 if degrees is None else _degrees(model.kind, degrees)
    z = rule.z
    P = len(z)
    if model.kind == "P1":
        return (d[0] / (1 + np.abs(z[:, 0]) ** 2) ** 2).reshape(P, 1, 1).astype(complex)
    if model.kind == "P1xP1":
        g = np.zeros((P, 2, 2), dtype=complex)
        g[:, 0, 0] = d[0] / (1 + np.abs(z[:, 0]) ** 2) ** 2
        g[:, 1, 1] = d[1] / (1 + np.abs(z[:, 1]) ** 2) ** 2
        return g
    q = 1 + np.sum(np.abs(z) ** 2, axis=1)
    g = np.empty((P, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            g[:, a, b] = ((q if a == b else 0) - np.conj(z[:, a]) * z[:, b]) / q ** 2
    return d[0] * g


def top_density(model: ModelManifold, g: np.ndarray, gref: np.ndarray) -> np.ndarray:
    """``omega_g^n / omega_ref^n``."""
    if model.n == 1:
        return (g[:, 0, 0] / gref[:, 0, 0]).real
    return (np.linalg.det(g) / np.linalg.det(gref)).real


def mixed_density(model: ModelManifold, a: np.ndarray, g: np.ndarray, gref: np.ndarray) -> np.ndarray:
    """``a ^ omega_g^(n-1) / omega_ref^n``."""
    if model.n == 1:
        return (a[:, 0, 0] / gref[:, 0, 0]).real
    mixed = a[:, 0, 0] * g[:, 1, 1] + a[:, 1, 1] * g[:, 0, 0] - a[:, 0, 1] * g[:, 1, 0] - a[:, 1, 0] * g[:, 0, 1]
    return (mixed / (2 * np.linalg.det(gref))).real


@dataclass(frozen=True)
class MomentPolynomial:
    """Torus-invariant function ``sum c[i, j] x1^i x2^j`` of moment coordinates.

    Defined on P1 (1-D coefficients) and P1xP1 (2-D coefficients); smooth on
    the whole manifold because ``x = |z|^2 / (1 + |z|^2)`` is.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim > 2:
            raise GeometryError("moment polynomials have at most two variables")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    def scaled(self, s: float) -> "MomentPolynomial":
        return MomentPolynomial(self.coeffs * s)

    def derivs(self, x: np.ndarray):
        """Value, gradient (P, n) and Hessian (P, n, n) in x."""
        from numpy.polynomial import polynomial as npp
        c = self.coeffs
        if c.ndim == 1:
            v = npp.polyval(x[:, 0], c)
            g = npp.polyval(x[:, 0], npp.polyder(c))[:, None]
            h = npp.polyval(x[:, 0], npp.polyder(c, 2))[:, None, None]
            return v, g, h
        x1, x2 = x[:, 0], x[:, 1]

        def ev(cc):
            return npp.polyval2d(x1, x2, cc) if cc.size else np.zeros_like(x1)

        c1 = npp.polyder(c, axis=0)
        c2 = npp.polyder(c, axis=1)
        v = ev(c)
        g = np.stack([ev(c1), ev(c2)], axis=1)
        h = np.empty((len(x1), 2, 2))
        h[:, 0, 0] = ev(npp.polyder(c, 2, axis=0))
        h[:, 1, 1] = ev(npp.polyder(c, 2, axis=1))
        h[:, 0, 1] = h[:, 1, 0] = ev(npp.polyder(c1, axis=1))
        return v, g, h


def ddbar_moment(model: ModelManifold, rule: QuadratureRule, psi: MomentPolynomial) -> np.ndarray:
    """Complex Hessian of a torus-invariant moment polynomial at the nodes.

    With ``s_a = |z_a|^2``: ``d_a dbar_b psi = delta_ab psi_a + zbar_a z_b psi_ab``
    (derivatives in ``s``), and ``x = s / (1 + s)`` on each factor.
    """
    if model.kind == "P2":
        raise GeometryError("moment-polynomial perturbations are supported on P1 and P1xP1")
    if psi.dim != model.n:
        raise GeometryError("perturbation has the wrong number of variables")
    z = rule.z
    s = np.abs(z) ** 2
    xs = 1 / (1 + s) ** 2
    xss = -2 / (1 + s) ** 3
    _, gx, hx = psi.derivs(rule.x)
    n = model.n
    ps = gx * xs
    pss = hx * xs[:, :, None] * xs[:, None, :]
    for a in range(n):
        pss[:, a, a] += gx[:, a] * xss[:, a]
    out = np.conj(z)[:, :, None] * z[:, None, :] * pss
    for a in range(n):
        out[:, a, a] += ps[:, a]
    return out


def chi_form(model: ModelManifold, rule: QuadratureRule, psi: Optional[MomentPolynomial] = None,
             degrees=None, allow_nonpositive: bool = False) -> np.ndarray:
    """Reference form for L2 (or ``degrees``) plus ``ddbar psi``."""
    chi = reference_form(model, rule, model.d2 if degrees is None else degrees)
    if psi is not None:
        chi = chi + ddbar_moment(model, rule, psi)
    if not allow_nonpositive:
        eig = np.linalg.eigvalsh(chi)
        bad = np.flatnonzero(eig[:, 0] <= 0)
        if bad.size:
            raise GeometryError(f"chi not Kähler at node {int(bad[0])} (z={rule.z[bad[0]]})")
    return chi


# ---------------------------------------------------------------------------
# Fubini-Study data of a Hermitian metric on sections
# ---------------------------------------------------------------------------

def inverse_sqrt(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    if w[0] <= 0 or w[0] <= 1e-12 * w[-1]:
        raise GeometryError("not a metric")
    return (V / np.sqrt(w)) @ V.conj().T


@dataclass
class FSData:
    zp: np.ndarray       # (P, N+1) H-orthonormal embedding coordinates
    q: np.ndarray        # (P,) |zp|^2
    g: np.ndarray        # (P, n, n) omega_H, normalised to c1(L1)
    gref: np.ndarray
    phi: np.ndarray      # (P,) potential of omega_H relative to omega_ref
    density: np.ndarray  # (P,) omega_H^n / omega_ref^n

    def mu_fs_diag(self) -> np.ndarray:
        return np.abs(self.zp) ** 2 / self.q[:, None]


def fs_metric_data(model: ModelManifold, k: int, H: np.ndarray, rule: Optional[QuadratureRule] = None) -> FSData:
    """Pull-back of the Fubini-Study metric by the embedding in an H-orthonormal basis.

    ``H`` is the Gram matrix of the monomial sections, so the orthonormal
    coordinates are ``H^(-1/2) S`` and ``|zp|^2 = S^* H^-1 S``.
    """
    H = np.asarray(H, dtype=complex)
    N1 = model.section_count(k)
    if H.shape != (N1, N1):
        raise GeometryError(f"metric has shape {H.shape}, expected {(N1, N1)}")
    if not np.allclose(H, H.conj().T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise GeometryError("not a metric")
    if rule is None:
        rule = quadrature_rule(model)
    B = inverse_sqrt(H)
    S, dS = sections_at(model, k, rule)
    zp = S @ B.T
    dzp = dS @ B.T
    q = np.sum(np.abs(zp) ** 2, axis=1)
    # project the derivatives orthogonally to zp; the Gram matrix of the
    # remainder avoids the cancellation in <D_a, D_b> - <D_a, zp><zp, D_b>/q
    proj = np.einsum("pi,pai->pa", zp.conj(), dzp) / q[:, None]
    perp = dzp - proj[:, :, None] * zp[:, None, :]
    g = np.einsum("pai,pbi->pab", perp, perp.conj()) / (q[:, None, None] * k)
    gref = reference_form(model, rule)
    return FSData(zp, q, g, gref, np.log(q) / k, top_density(model, g, gref))


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def integrate_values(rule: QuadratureRule, values: np.ndarray) -> float:
    values = np.asarray(values)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise GeometryError(f"non-finite integrand at node {int(bad[0])} (z={rule.z[bad[0]]})")
    return float(np.dot(rule.weights, values.real if np.iscomplexobj(values) else values))


def integrate(model: ModelManifold, integrand: Callable[[QuadratureRule], np.ndarray],
              order: Optional[int] = None, angles: int = 1) -> Tuple[float, float]:
    """Integral against ``omega_ref^n`` with an order-doubling error estimate."""
    q = order or model.quad_order
    coarse = integrate_values(quadrature_rule(model, q, angles), integrand(quadrature_rule(model, q, angles)))
    fine_rule = quadrature_rule(model, 2 * q, angles)
    fine = integrate_values(fine_rule, integrand(fine_rule))
    return fine, abs(fine - coarse)


def quadrature_gamma(model: ModelManifold, psi: Optional[MomentPolynomial] = None) -> float:
    rule = quadrature_rule(model)
    gref = reference_form(model, rule)
    chi = chi_form(model, rule, psi, allow_nonpositive=True)
    return integrate_values(rule, mixed_density(model, chi, gref, gref)) / integrate_values(rule, np.ones(len(rule)))
