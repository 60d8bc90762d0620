"""Hermitian metrics on sections, the moment map and the balancing functional.

Conventions: ``H`` is the Gram matrix of the monomial sections; the
embedding uses the orthonormal frame ``B = H^(-1/2)``.  The balancing
functional ``I`` has differential ``dI(Hdot) = -Re tr(mu0 X)`` with
``X = H^(-1/2) Hdot H^(-1/2)``, which makes it convex along geodesics and
its gradient flow the balancing flow.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    FSData,
    GeometryError,
    ModelManifold,
    MomentPolynomial,
    QuadratureRule,
    chi_form,
    fs_metric_data,
    integrate_values,
    mixed_density,
    quadrature_rule,
)

EIG_FLOOR = 1e-12


class MetricError(GeometryError):
    pass


def hermitize(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    return 0.5 * (H + H.conj().T)


def check_metric(H: np.ndarray) -> np.ndarray:
    H = hermitize(H)
    w = np.linalg.eigvalsh(H)
    if w[0] <= 0 or w[0] <= EIG_FLOOR * w[-1]:
        raise MetricError("not a metric")
    return H


def _eig_fn(H: np.ndarray, fn) -> np.ndarray:
    w, V = np.linalg.eigh(hermitize(H))
    return (V * fn(w)) @ V.conj().T


def msqrt(H):
    return _eig_fn(H, np.sqrt)


def minvsqrt(H):
    return _eig_fn(H, lambda w: 1 / np.sqrt(w))


def mlog(H):
    return _eig_fn(H, np.log)


def mexp_hermitian(A):
    return _eig_fn(A, np.exp)


@dataclass(frozen=True)
class HermitianMetric:
    matrix: np.ndarray
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_metric(self.matrix))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def condition(self) -> float:
        w = np.linalg.eigvalsh(self.matrix)
        return float(w[-1] / w[0])

    def to_json(self, model: Optional[ModelManifold] = None) -> str:
        data = {"k": self.k, "entries": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix]}
        if model is not None:
            data["model"] = model.to_dict()
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HermitianMetric":
        data = json.loads(text)
        M = np.array([[complex(re, im) for re, im in row] for row in data["entries"]])
        return cls(M, int(data.get("k", 1)))


def _matrix(H) -> np.ndarray:
    return H.matrix if isinstance(H, HermitianMetric) else check_metric(H)


def is_diagonal(H: np.ndarray) -> bool:
    return not np.any(H - np.diag(np.diag(H)))


def rule_for(model: ModelManifold, k: int, H: np.ndarray, order: Optional[int] = None) -> QuadratureRule:
    """Torus-invariant rule for diagonal metrics, otherwise angular nodes too."""
    angles = 1 if is_diagonal(H) else model.default_angles(k)
    return quadrature_rule(model, order, angles)


@dataclass(frozen=True)
class MomentMapValue:
    mu: np.ndarray
    mu0: np.ndarray
    residual: float


def _chi_weights(model: ModelManifold, k: int, fs: FSData, chi: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Node weights of ``(1/gamma) chi ^ (k omega_H)^(n-1)``."""
    dens = mixed_density(model, chi, fs.g, fs.gref) * k ** (model.n - 1)
    return rule.weights * dens / float(model.gamma)


def moment_map(model: ModelManifold, k: int, H, psi: Optional[MomentPolynomial] = None,
               frame: Optional[np.ndarray] = None, order: Optional[int] = None) -> MomentMapValue:
    """``mu = (1/gamma) int mu_FS chi ^ (iota^* omega_FS)^(n-1)``.

    ``frame`` optionally replaces ``H^(-1/2)`` by another H-orthonormal frame
    ``W H^(-1/2)`` (``W`` unitary); the result is then conjugated by ``W``.
    """
    H = _matrix(H)
    if frame is None:
        rule = rule_for(model, k, H, order)
    else:
        # a rotated frame has off-diagonal entries even for diagonal H
        rule = quadrature_rule(model, order, model.default_angles(k))
    fs = fs_metric_data(model, k, H, rule)
    chi = chi_form(model, rule, psi)
    c = _chi_weights(model, k, fs, chi, rule)
    if frame is not None:
        W = frame @ msqrt(H)
        zn = (fs.zp @ W.T) / np.sqrt(fs.q)[:, None]
    else:
        zn = fs.zp / np.sqrt(fs.q)[:, None]
    if rule.angles == 1 and frame is None:
        # off-diagonal entries carry nonzero torus weight and integrate to 0
        mu = np.diag(c @ np.abs(zn) ** 2).astype(complex)
    else:
        mu = (zn.T * c) @ zn.conj()
    mu = hermitize(mu)
    N1 = mu.shape[0]
    mu0 = mu - np.trace(mu).real / N1 * np.eye(N1)
    return MomentMapValue(mu, mu0, float(np.linalg.norm(mu0, 2)))


def balanced_residual(model: ModelManifold, k: int, H, psi: Optional[MomentPolynomial] = None) -> float:
    return moment_map(model, k, H, psi).residual


def geodesic(H0, A: np.ndarray, t: float) -> np.ndarray:
    """``H0^(1/2) e^(-2tA) H0^(1/2)``; equals ``e^(-tA) H0 e^(-tA)`` when A and H0 commute."""
    H0 = _matrix(H0)
    A = hermitize(A)
    R = msqrt(H0)
    return hermitize(R @ mexp_hermitian(-2 * t * A) @ R)


def functional_gradient(model: ModelManifold, k: int, H, B: np.ndarray,
                        psi: Optional[MomentPolynomial] = None) -> float:
    """Directional derivative ``-Re tr(mu0 H^(-1/2) B H^(-1/2))``."""
    H = _matrix(H)
    R = minvsqrt(H)
    mu0 = moment_map(model, k, H, psi).mu0
    return float(-np.trace(mu0 @ R @ hermitize(B) @ R).real)


def balancing_functional(model: ModelManifold, k: int, H, psi: Optional[MomentPolynomial] = None,
                         method: str = "line", nodes: int = 16) -> float:
    """Balancing functional relative to ``H = Id``.

    ``method="line"`` integrates the moment-map pairing along ``s -> H^s``;
    ``method="closed"`` uses the energy-type closed form, an independent route.
    """
    H = _matrix(H)
    if method == "closed":
        return _closed_form(model, k, H, psi)
    if method != "line":
        raise ValueError(f"unknown method {method!r}")
    L = mlog(H)
    s, w = np.polynomial.legendre.leggauss(nodes)
    s, w = 0.5 * (s + 1), 0.5 * w
    total = 0.0
    for si, wi in zip(s, w):
        Hs = mexp_hermitian(si * L)
        # along H^s the tangent in the orthonormal frame is L itself
        total += wi * float(-np.trace(moment_map(model, k, Hs, psi).mu0 @ L).real)
    return total


def _closed_form(model: ModelManifold, k: int, H: np.ndarray, psi) -> float:
    n = model.n
    N1 = H.shape[0]
    Id = np.eye(N1)
    rule = rule_for(model, k, H)
    fs = fs_metric_data(model, k, H, rule)
    base = fs_metric_data(model, k, Id, rule)
    chi = chi_form(model, rule, psi)
    phi = fs.phi - base.phi
    if n == 1:
        energy = integrate_values(rule, phi * mixed_density(model, chi, fs.g, fs.gref))
    else:
        d1 = mixed_density(model, chi, base.g, base.gref)
        d2 = mixed_density(model, chi, fs.g, fs.gref)
        energy = 0.5 * integrate_values(rule, phi * (d1 + d2))
    logdet = float(np.sum(np.log(np.linalg.eigvalsh(H))))
    vol = float(model.volume)
    return k ** n / float(model.gamma) * energy + k ** (n - 1) * vol / N1 * logdet
