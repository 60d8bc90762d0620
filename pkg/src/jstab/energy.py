"""Energy functionals on torus-invariant potentials of P1 and P1xP1.

Everything is computed in log coordinates ``t = log |z|^2`` (one per
factor), where a torus-invariant (1,1)-form is a real symmetric matrix
field.  The reference form of degrees ``d`` is ``diag(d p)`` with
``p = e^t / (1 + e^t)^2`` and a potential adds its ``t``-Hessian.  With the
c1 normalisation, for a form matrix ``A``:

* n = 1: ``omega^1 <-> A dt``;
* n = 2: ``omega^2 <-> 2 det A dt`` and ``chi ^ omega <-> mixed(X, A) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logsumexp

from .geometry import GeometryError, ModelManifold, MomentPolynomial
from .polyalg import Polynomial, WeightVector
from .qfield import as_exact


class EnergyError(ValueError):
    pass


def _check_model(model: ModelManifold):
    if model.kind not in ("P1", "P1xP1"):
        raise GeometryError("energy functionals are implemented on P1 and P1xP1")


def _log_x(t):
    """``(log x, log(1 - x))`` for ``x = expit(t)``, valid at t = +-inf."""
    t = np.asarray(t, dtype=float)
    return -np.logaddexp(0.0, -t), -np.logaddexp(0.0, t)


def _p(t):
    return expit(t) * expit(-np.asarray(t, dtype=float))


def _log_p(t):
    lx, l1x = _log_x(t)
    return lx + l1x


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

class Potential:
    """Torus-invariant function of the log coordinates."""

    n: int

    def value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def centers(self) -> List[List[float]]:
        """Per-axis locations around which the curvature is concentrated."""
        return [[0.0] for _ in range(self.n)]

    def form(self, t: np.ndarray, degrees: Sequence[float]) -> np.ndarray:
        """``diag(d p) + Hess phi`` in log coordinates."""
        return _reference(t, degrees) + self.hess(t)

    def __add__(self, other: "Potential") -> "Potential":
        return LinearPotential(((1.0, self), (1.0, other)))

    def __sub__(self, other: "Potential") -> "Potential":
        return LinearPotential(((1.0, self), (-1.0, other)))

    def __rmul__(self, c: float) -> "Potential":
        return LinearPotential(((float(c), self),))


class MomentPotential(Potential):
    """A polynomial in the moment coordinates ``x = expit(t)``."""

    def __init__(self, poly: Union[MomentPolynomial, Sequence, np.ndarray]):
        self.poly = poly if isinstance(poly, MomentPolynomial) else MomentPolynomial(np.asarray(poly, dtype=float))
        self.n = self.poly.dim

    def _x(self, t):
        return expit(np.asarray(t, dtype=float).reshape(-1, self.n))

    def value(self, t):
        return self.poly.derivs(self._x(t))[0]

    def hess(self, t):
        x = self._x(t)
        _, g, h = self.poly.derivs(x)
        p = x * (1 - x)
        out = h * p[:, :, None] * p[:, None, :]
        for a in range(self.n):
            out[:, a, a] += p[:, a] * (1 - 2 * x[:, a]) * g[:, a]
        return out


def constant_potential(n: int, c: float) -> MomentPotential:
    return MomentPotential(np.full((1,) * n, float(c)))


class BergmanPotential(Potential):
    """``(1/k) log sum_j c_j |s_j|^2_ref`` for the monomial sections of L1^k.

    ``log_c[j] = -log H_jj`` for a diagonal Gram matrix ``H``.
    """

    def __init__(self, model: ModelManifold, k: int, log_c: Sequence[float]):
        _check_model(model)
        self.model, self.k, self.n = model, k, model.n
        self.alpha = np.array(model.section_exponents(k), dtype=float)
        self.log_c = np.asarray(log_c, dtype=float)
        if self.log_c.shape != (len(self.alpha),):
            raise EnergyError("one coefficient per section expected")
        self.dk = np.array(model.d1, dtype=float) * k

    @classmethod
    def from_metric(cls, model, k, H: np.ndarray) -> "BergmanPotential":
        H = np.asarray(H)
        if np.any(H - np.diag(np.diag(H))):
            raise EnergyError("only torus-invariant (diagonal) metrics have invariant potentials")
        return cls(model, k, -np.log(np.diag(H).real))

    def _logs(self, t):
        t = np.asarray(t, dtype=float).reshape(-1, self.n)
        lx, l1x = _log_x(t)
        out = np.tile(self.log_c, (len(t), 1))
        # 0 * log 0 = 0 at the invariant points t = +-inf
        lx = np.where(np.isinf(lx), -1e300, lx)
        l1x = np.where(np.isinf(l1x), -1e300, l1x)
        for a in range(self.n):
            al = self.alpha[None, :, a]
            rest = self.dk[a] - al
            out += np.where(al == 0, 0.0, al * lx[:, a:a + 1]) + np.where(rest == 0, 0.0, rest * l1x[:, a:a + 1])
        return out

    def weights(self, t):
        L = self._logs(t)
        return np.exp(L - logsumexp(L, axis=1, keepdims=True))

    def value(self, t):
        return logsumexp(self._logs(t), axis=1) / self.k

    def hess(self, t):
        w = self.weights(t)
        mean = w @ self.alpha
        dev = self.alpha[None] - mean[:, None, :]
        cov = np.einsum("pj,pja,pjb->pab", w, dev, dev) / self.k
        t = np.asarray(t, dtype=float).reshape(-1, self.n)
        p = _p(t)
        for a in range(self.n):
            cov[:, a, a] -= self.model.d1[a] * p[:, a]
        return cov

    def form(self, t, degrees):
        if tuple(float(d) for d in degrees) != tuple(float(d) for d in self.model.d1):
            return super().form(t, degrees)
        # the pulled-back Fubini-Study form, without the cancellation against the reference
        w = self.weights(t)
        mean = w @ self.alpha
        dev = self.alpha[None] - mean[:, None, :]
        return np.einsum("pj,pja,pjb->pab", w, dev, dev) / self.k

    def centers(self):
        out = []
        for a in range(self.n):
            pts = {0.0}
            step = np.zeros(self.n)
            step[a] = 1
            index = {tuple(al): j for j, al in enumerate(self.alpha)}
            for j, al in enumerate(self.alpha):
                nb = index.get(tuple(al + step))
                if nb is not None:
                    pts.add(round(float(self.log_c[j] - self.log_c[nb]), 3))
            out.append(sorted(pts))
        return out


class LinearPotential(Potential):
    def __init__(self, terms: Sequence[Tuple[float, Potential]]):
        self.terms = tuple(terms)
        self.n = self.terms[0][1].n

    def value(self, t):
        return sum(c * p.value(t) for c, p in self.terms)

    def hess(self, t):
        return sum(c * p.hess(t) for c, p in self.terms)

    def centers(self):
        out = [set() for _ in range(self.n)]
        for _, p in self.terms:
            for a, cs in enumerate(p.centers()):
                out[a].update(cs)
        return [sorted(s) for s in out]


class ShiftedPotential(Potential):
    def __init__(self, base: Potential, c: float):
        self.base, self.c, self.n = base, float(c), base.n

    def value(self, t):
        return self.base.value(t) + self.c

    def hess(self, t):
        return self.base.hess(t)

    def centers(self):
        return self.base.centers()


# ---------------------------------------------------------------------------
# quadrature in log coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogQuadrature:
    t: np.ndarray        # (P, n)
    weights: np.ndarray  # (P,)


def _axis_rule(centers: Sequence[float], half_width: float, panel: float, order: int):
    ivals = sorted((c - half_width, c + half_width) for c in centers)
    merged = [list(ivals[0])]
    for a, b in ivals[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    g, w = np.polynomial.legendre.leggauss(order)
    ts, ws = [], []
    for a, b in merged:
        m = max(1, int(math.ceil((b - a) / panel)))
        edges = np.linspace(a, b, m + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            ts.append(0.5 * (hi - lo) * g + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(ts), np.concatenate(ws)


def log_quadrature(n: int, centers: Optional[Sequence[Sequence[float]]] = None, half_width: float = 30.0,
                   panel: float = 3.0, order: int = 16) -> LogQuadrature:
    """Composite Gauss rule covering ``[c - half_width, c + half_width]`` per centre and axis."""
    centers = centers or [[0.0]] * n
    rules = [_axis_rule(centers[a], half_width, panel, order) for a in range(n)]
    if n == 1:
        return LogQuadrature(rules[0][0][:, None], rules[0][1])
    (t1, w1), (t2, w2) = rules
    T1, T2 = np.meshgrid(t1, t2, indexing="ij")
    return LogQuadrature(np.stack([T1.ravel(), T2.ravel()], axis=1), np.outer(w1, w2).ravel())


def _quad_for(n, potentials, quad):
    if quad is not None:
        return quad
    cs = [set() for _ in range(n)]
    for p in potentials:
        if p is None:
            continue
        for a, c in enumerate(p.centers()):
            cs[a].update(c)
    return log_quadrature(n, [sorted(c) for c in cs])


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

def _degrees(model: ModelManifold, degrees) -> Tuple[float, ...]:
    if degrees is None:
        return tuple(float(v) for v in model.d2)
    if np.isscalar(degrees):
        return (float(degrees),) * model.n
    d = tuple(float(v) for v in degrees)
    if len(d) != model.n:
        raise EnergyError("one degree per factor expected")
    return d


def _reference(t: np.ndarray, degrees: Sequence[float]) -> np.ndarray:
    p = _p(t)
    out = np.zeros((len(t), len(degrees), len(degrees)))
    for a, d in enumerate(degrees):
        out[:, a, a] = d * p[:, a]
    return out


def form(t: np.ndarray, degrees: Sequence[float], phi: Optional[Potential] = None) -> np.ndarray:
    if phi is None:
        return _reference(t, degrees)
    return phi.form(t, degrees)


def _vol(A):
    if A.shape[-1] == 1:
        return A[:, 0, 0]
    return 2 * (A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0])


def _mixed(X, A):
    if A.shape[-1] == 1:
        return X[:, 0, 0]
    return X[:, 0, 0] * A[:, 1, 1] + X[:, 1, 1] * A[:, 0, 0] - X[:, 0, 1] * A[:, 1, 0] - X[:, 1, 0] * A[:, 0, 1]


def _sym_top(A, B):
    """Density of ``sum_i omega_A^i ^ omega_B^(n-i)``."""
    if A.shape[-1] == 1:
        return A[:, 0, 0] + B[:, 0, 0]
    return _vol(A) + _mixed(A, B) + _vol(B)


def _sym_lower(X, A, B):
    """Density of ``chi ^ sum_i omega_A^i ^ omega_B^(n-1-i)``."""
    if A.shape[-1] == 1:
        return X[:, 0, 0]
    return _mixed(X, A) + _mixed(X, B)


def class_gamma(model: ModelManifold, degrees=None) -> float:
    """``[chi].[omega]^(n-1) / [omega]^n`` for the class of the given degrees."""
    e = _degrees(model, degrees)
    d = model.d1
    if model.n == 1:
        return e[0] / d[0]
    return (e[0] * d[1] + e[1] * d[0]) / (2 * d[0] * d[1])


@dataclass(frozen=True)
class Chi:
    """Closed (1,1)-form: reference form of the given degrees plus ``ddbar psi``."""

    degrees: Tuple[float, ...]
    psi: Optional[Potential] = None

    @classmethod
    def of(cls, model: ModelManifold, degrees=None, psi: Optional[Potential] = None) -> "Chi":
        _check_model(model)
        return cls(_degrees(model, degrees), psi)

    @classmethod
    def canonical(cls, model: ModelManifold) -> "Chi":
        """Curvature form of the reference metric on K_M (degree -2 per factor)."""
        return cls.of(model, (-2,) * model.n)

    def matrix(self, t):
        return form(t, self.degrees, self.psi)

    def gamma(self, model: ModelManifold) -> float:
        return class_gamma(model, self.degrees)


def _chi(model, chi) -> Chi:
    if chi is None:
        return Chi.of(model)
    return chi


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

def i_energy(model: ModelManifold, phi: Potential, quad: Optional[LogQuadrature] = None) -> float:
    _check_model(model)
    q = _quad_for(model.n, [phi], quad)
    om0 = form(q.t, model.d1)
    om = form(q.t, model.d1, phi)
    return float(np.sum(q.weights * phi.value(q.t) * (_vol(om0) - _vol(om))))


def j_aym(model: ModelManifold, phi: Potential, quad: Optional[LogQuadrature] = None) -> float:
    _check_model(model)
    q = _quad_for(model.n, [phi], quad)
    om0 = form(q.t, model.d1)
    om = form(q.t, model.d1, phi)
    v = phi.value(q.t)
    n = model.n
    return float(np.sum(q.weights * v * (_vol(om0) - _sym_top(om0, om) / (n + 1))))


def j_hat(model: ModelManifold, phi: Potential, chi: Optional[Chi] = None,
          quad: Optional[LogQuadrature] = None) -> float:
    """Closed form ``-(n/(n+1)) gamma int phi sum omega^i omega_phi^(n-i) + int phi chi sum ...``."""
    _check_model(model)
    chi = _chi(model, chi)
    q = _quad_for(model.n, [phi, chi.psi], quad)
    om0 = form(q.t, model.d1)
    om = form(q.t, model.d1, phi)
    X = chi.matrix(q.t)
    n = model.n
    g = chi.gamma(model)
    v = phi.value(q.t)
    return float(np.sum(q.weights * v * (-(n / (n + 1)) * g * _sym_top(om0, om) + _sym_lower(X, om0, om))))


def entropy(model: ModelManifold, phi: Potential, quad: Optional[LogQuadrature] = None) -> float:
    """``int log(omega_phi^n / omega^n) omega_phi^n`` (non-negative by Jensen)."""
    _check_model(model)
    q = _quad_for(model.n, [phi], quad)
    v = _vol(form(q.t, model.d1, phi))
    d = np.array(model.d1, dtype=float)
    log_v0 = math.log(math.factorial(model.n) * float(np.prod(d))) + _log_p(q.t).sum(axis=1)
    if np.any(v < -1e-12 * np.max(np.abs(v))):
        raise EnergyError("non-positive volume density")
    # the density may underflow far out on the tails
    live = v > 0
    return float(np.sum(q.weights[live] * v[live] * (np.log(v[live]) - log_v0[live])))


def mabuchi(model: ModelManifold, phi: Potential, chi: Optional[Chi] = None,
            quad: Optional[LogQuadrature] = None) -> float:
    """Entropy plus the closed-form energy with the canonical-class form."""
    chi = chi or Chi.canonical(model)
    q = _quad_for(model.n, [phi, chi.psi], quad)
    return entropy(model, phi, q) + j_hat(model, phi, chi, q)


# ---------------------------------------------------------------------------
# paths and path integrals
# ---------------------------------------------------------------------------

class PotentialPath:
    """``s -> (phi_s, phidot_s)`` for ``s`` in [0, 1] with ``phi_0 = 0``."""

    def __init__(self, n: int, at: Callable[[float], Tuple[Potential, Callable]],
                 centers: Optional[List[List[float]]] = None):
        self.n = n
        self._at = at
        self._centers = centers

    def at(self, s: float):
        return self._at(s)

    @classmethod
    def polynomial(cls, terms: Sequence[Potential]) -> "PotentialPath":
        """``phi_s = sum_m s^(m+1) terms[m]``."""
        terms = list(terms)
        n = terms[0].n

        def at(s):
            phi = LinearPotential([(s ** (m + 1), p) for m, p in enumerate(terms)])
            dot = LinearPotential([((m + 1) * s ** m, p) for m, p in enumerate(terms)])
            return phi, dot.value

        cs = LinearPotential([(1.0, p) for p in terms]).centers()
        return cls(n, at, cs)

    @classmethod
    def linear(cls, phi: Potential) -> "PotentialPath":
        return cls.polynomial([phi])

    def centers(self):
        return self._centers


def bergman_geodesic_path(model: ModelManifold, k: int, lam: Sequence[float], t_end: float,
                          scale: float = 1.0) -> PotentialPath:
    """Potentials of ``H(s) = diag(exp(-2 s t_end lam))`` relative to ``H = Id``, times ``scale``."""
    lam = np.asarray(lam, dtype=float)
    base = BergmanPotential(model, k, np.zeros(len(lam)))

    def at(s):
        pot = BergmanPotential(model, k, 2 * s * t_end * lam)
        phi = LinearPotential(((scale, pot), (-scale, base)))

        def dot(t):
            # d/ds of (1/k) log sum exp(2 s t_end lam_j) |s_j|^2
            return scale * 2 * t_end * (pot.weights(t) @ lam) / k

        return phi, dot

    cs = BergmanPotential(model, k, 2 * t_end * lam).centers()
    return PotentialPath(model.n, at, [sorted(set(c) | {0.0}) for c in cs])


def _path_nodes(nodes: int):
    s, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (s + 1), 0.5 * w


def j_hat_path(model: ModelManifold, path: PotentialPath, chi: Optional[Chi] = None, nodes: int = 16,
               quad: Optional[LogQuadrature] = None) -> float:
    """``n int_0^1 int phidot (chi ^ omega_s^(n-1) - gamma omega_s^n) ds``.

    The factor ``n`` makes this the derivative of the closed form (they agree for n = 1).
    """
    _check_model(model)
    chi = _chi(model, chi)
    q = quad or log_quadrature(model.n, path.centers())
    X = chi.matrix(q.t)
    g = chi.gamma(model)
    total = 0.0
    for s, w in zip(*_path_nodes(nodes)):
        phi, dot = path.at(s)
        om = form(q.t, model.d1, phi)
        total += w * float(np.sum(q.weights * dot(q.t) * (_mixed(X, om) - g * _vol(om))))
    return model.n * total


def j_aym_path(model: ModelManifold, path: PotentialPath, nodes: int = 16,
               quad: Optional[LogQuadrature] = None) -> float:
    _check_model(model)
    q = quad or log_quadrature(model.n, path.centers())
    v0 = _vol(form(q.t, model.d1))
    total = 0.0
    for s, w in zip(*_path_nodes(nodes)):
        phi, dot = path.at(s)
        total += w * float(np.sum(q.weights * dot(q.t) * (v0 - _vol(form(q.t, model.d1, phi)))))
    return total


# ---------------------------------------------------------------------------
# divisors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantDivisor:
    """A divisor whose points (P1) or face (P1xP1) are torus invariant in |z|.

    On P1: ``points`` holds log coordinates (``-inf`` for ``Z1 = 0``, ``+inf``
    for ``Z0 = 0``).  On P1xP1: ``axis`` and ``side`` select the face
    ``x_axis = side``.
    """

    points: Tuple[float, ...] = ()
    axis: int = -1
    side: int = 0

    @classmethod
    def point(cls, t: float) -> "InvariantDivisor":
        return cls(points=(float(t),))

    @classmethod
    def face(cls, axis: int, side: int) -> "InvariantDivisor":
        return cls(axis=axis, side=side)

    @classmethod
    def from_binary_form(cls, coeffs: Sequence[complex]) -> "InvariantDivisor":
        """Zeros of ``sum_j coeffs[j] Z0^(m-j) Z1^j`` on P1 (m = len - 1)."""
        c = np.asarray(coeffs, dtype=complex)
        m = len(c) - 1
        nz = np.flatnonzero(np.abs(c) > 0)
        if nz.size == 0:
            raise EnergyError("zero divisor equation")
        low, high = int(nz[0]), int(nz[-1])
        pts = [-math.inf] * low + [math.inf] * (m - high)
        if high > low:
            roots = np.roots(c[low:high + 1][::-1])
            pts += [float(2 * np.log(abs(z))) for z in roots]
        return cls(points=tuple(sorted(pts)))

    def volume(self, model: ModelManifold) -> float:
        if model.n == 1:
            return float(len(self.points))
        return float(model.d1[1 - self.axis])


def _divisor_term(model: ModelManifold, D: InvariantDivisor, phi: Potential, dot: Callable,
                  rule: Tuple[np.ndarray, np.ndarray]) -> float:
    """``int_D phidot omega_phi^(n-1)``."""
    if model.n == 1:
        return float(np.sum(dot(np.array(D.points)[:, None])))
    t1, w1 = rule
    t = np.empty((len(t1), 2))
    t[:, D.axis] = -math.inf if D.side == 0 else math.inf
    t[:, 1 - D.axis] = t1
    b = 1 - D.axis
    om = form(t, model.d1, phi)[:, b, b]
    return float(np.sum(w1 * dot(t) * om))


def i_aym_divisor(model: ModelManifold, D: InvariantDivisor, path: PotentialPath, nodes: int = 16) -> float:
    """``-(1/Vol D) int_0^1 int_D phidot omega_phi^(n-1) ds``."""
    _check_model(model)
    if (model.n == 1) != (D.axis < 0):
        raise EnergyError("divisor does not match the model")
    rule = None
    if model.n == 2:
        cs = path.centers() or [[0.0], [0.0]]
        rule = _axis_rule(cs[1 - D.axis], 30.0, 3.0, 16)
    total = 0.0
    for s, w in zip(*_path_nodes(nodes)):
        phi, dot = path.at(s)
        total += w * _divisor_term(model, D, phi, dot, rule)
    return -total / D.volume(model)


# ---------------------------------------------------------------------------
# coercivity
# ---------------------------------------------------------------------------

def sup_value(phi: Potential, quad: LogQuadrature) -> float:
    n = phi.n
    corners = np.array(np.meshgrid(*[[-math.inf, math.inf]] * n, indexing="ij")).reshape(n, -1).T
    vals = np.concatenate([phi.value(quad.t), phi.value(corners)])
    return float(np.max(vals))


@dataclass
class MarginReport:
    margin: float
    samples: List[Tuple[float, float]]  # (I, Jhat - gamma (I - J_AYM))
    gamma: float


def coercivity_margin(model: ModelManifold, chi: Optional[Chi], family: Sequence[Potential]) -> MarginReport:
    """Inf over the (sup-normalised) family of ``Jhat - gamma (I - J_AYM)``."""
    _check_model(model)
    chi = _chi(model, chi)
    g = chi.gamma(model)
    samples = []
    for phi in family:
        q = _quad_for(model.n, [phi, chi.psi], None)
        phi = ShiftedPotential(phi, -sup_value(phi, q))
        I = i_energy(model, phi, q)
        val = j_hat(model, phi, chi, q) - g * (I - j_aym(model, phi, q))
        samples.append((I, val))
    return MarginReport(min(v for _, v in samples), samples, g)


def diverging_family(model: ModelManifold, k: int, lam: Sequence[float], scales: Sequence[float]) -> List[Potential]:
    """Bergman potentials of ``diag(exp(-2 s lam))`` for the given ``s``."""
    lam = np.asarray(lam, dtype=float)
    return [BergmanPotential(model, k, 2 * s * lam) for s in scales]


# ---------------------------------------------------------------------------
# asymptotic slopes
# ---------------------------------------------------------------------------

def _restricted_binary_form(g: Polynomial) -> np.ndarray:
    """Coefficients of ``g(Z0^m, Z0^(m-1) Z1, ..., Z1^m)`` in powers of ``Z1``."""
    m = g.nvars - 1
    deg = g.degree * m
    out = np.zeros(deg + 1, dtype=complex)
    for mono, c in g.terms.items():
        j = sum(i * e for i, e in enumerate(mono))
        out[j] += complex(float(c))
    return out


@dataclass(frozen=True)
class SlopeResult:
    numeric: float
    algebraic: object
    gap: float
    history: Tuple[float, float, float]


def numeric_slope(model: ModelManifold, D: InvariantDivisor, lam: Sequence[float], r: int,
                  t: float, h: float = 0.25) -> float:
    """``(1/2) d/dt I_D`` along the Bergman geodesic at time ``t`` by central differences.

    The potential is taken on ``L1^r`` itself (not divided by ``r``).
    """
    def I(T):
        path = bergman_geodesic_path(model, r, lam, T, scale=r)
        return i_aym_divisor(model, D, path, nodes=16 + 8 * int(math.ceil(T)))
    return (I(t + h) - I(t - h)) / (4 * h)


def algebraic_slope(weights: WeightVector, g: Polynomial, r: int):
    """``-b0hat / a0hat`` of the divisor's central fibre, in the section-degree variable."""
    from .corpus import rational_normal_curve
    from .stability import TestConfiguration, divisor_weight_polynomials

    wv = weights if isinstance(weights, WeightVector) else WeightVector.of(weights)
    ideal = rational_normal_curve(len(wv) - 1)
    if not wv.is_sorted():
        # reversing the sections is an automorphism of the rational normal curve
        rev = WeightVector(wv.entries[::-1], wv.d)
        if not rev.is_sorted():
            raise EnergyError("weights must be monotone to use the rational normal curve")
        wv = rev
        g = Polynomial({tuple(reversed(mono)): c for mono, c in g.terms.items()}, g.nvars)
    tc = TestConfiguration.create(ideal, wv, r=r, n=1)
    div = divisor_weight_polynomials(tc, g)
    # divisor data are fitted in k = r K; convert back to K
    return as_exact(-div.bhat0 * r / div.ahat0)


def asymptotic_slope_iaym(model: ModelManifold, g: Polynomial, weights: WeightVector, r: int = 1,
                          t_max: float = 20.0, tol: float = 1e-3) -> SlopeResult:
    """Numeric vs algebraic limit of ``(1/2) d/dt I_D`` along ``diag(exp(-2 t A))`` on P1."""
    weights = weights if isinstance(weights, WeightVector) else WeightVector.of(weights)
    lam = weights.entries
    if model.kind != "P1":
        raise GeometryError("asymptotic slopes are implemented on P1")
    N1 = model.section_count(r)
    if g.nvars != N1 or len(lam) != N1:
        raise EnergyError("divisor and weights must live on the sections of L1^r")
    lam_f = [float(v) for v in lam]
    D = InvariantDivisor.from_binary_form(_restricted_binary_form(g))
    s1, s2, s3 = (numeric_slope(model, D, lam_f, r, t) for t in (t_max / 4, t_max / 2, t_max))
    if abs(s3 - s2) > 10 * tol:
        raise EnergyError("slope not settled; increase tMax")
    numeric = 2 * s3 - s2
    alg = algebraic_slope(weights, g, r)
    a = float(alg)
    gap = abs(numeric - a) / abs(a) if a != 0 else abs(numeric)
    return SlopeResult(numeric, alg, gap, (s1, s2, s3))
