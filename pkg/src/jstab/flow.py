"""Balancing flow on Hermitian metrics, the J-flow PDE, and their comparison.

The J-flow is solved on torus-invariant potentials as a function of the
reference moment coordinates ``x in [0, 1]^n`` (P1 and P1xP1).  Forms are
represented by their Hessian in log coordinates divided by
``sqrt(p_i p_j)``, ``p = x (1 - x)``; the reference form is then
``diag(d)`` and a potential contributes ``L_i phi = (p_i phi_i)_i`` on the
diagonal and ``sqrt(p_1 p_2) phi_12`` off it.
"""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .bergman import (
    EIG_FLOOR,
    balanced_residual,
    balancing_functional,
    check_metric,
    hermitize,
    mexp_hermitian,
    moment_map,
    msqrt,
    rule_for,
)
from .geometry import (
    GeometryError,
    ModelManifold,
    MomentPolynomial,
    ddbar_moment,
    integrate_values,
    quadrature_rule,
    reference_form,
    sections_at,
    top_density,
)


class FlowError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# balancing flow
# ---------------------------------------------------------------------------

def time_scale(model: ModelManifold, k: int) -> float:
    """Factor making the rescaled flow's time agree with J-flow time as k grows.

    Uses the leading Bergman density ``(N+1)/Vol`` in the c1 normalisation.
    """
    N1 = model.section_count(k)
    return float(model.gamma) * N1 / (2 * k ** (model.n - 1) * float(model.volume))


def balancing_flow_step(model: ModelManifold, k: int, H: np.ndarray, dt: float,
                        psi: Optional[MomentPolynomial] = None, mu0: Optional[np.ndarray] = None) -> np.ndarray:
    """Exponential congruence step ``H^(1/2) exp(2 dt k tau mu0) H^(1/2)``.

    In the orthonormal frame the embedding moves by ``exp(-dt k tau mu0)``;
    ``tau`` is :func:`time_scale`.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    H = check_metric(H)
    if mu0 is None:
        mu0 = moment_map(model, k, H, psi).mu0
    R = msqrt(H)
    rate = k * time_scale(model, k)
    return hermitize(R @ mexp_hermitian(2 * dt * rate * mu0) @ R)


@dataclass
class FlowTrajectory:
    times: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    functional_values: List[float] = field(default_factory=list)
    min_eigs: List[float] = field(default_factory=list)
    max_eigs: List[float] = field(default_factory=list)
    metrics: List[np.ndarray] = field(default_factory=list)
    converged: bool = False
    tag: str = ""

    def record(self, t, res, fval, H):
        w = np.linalg.eigvalsh(H)
        self.times.append(float(t))
        self.residuals.append(float(res))
        self.functional_values.append(float(fval))
        self.min_eigs.append(float(w[0]))
        self.max_eigs.append(float(w[-1]))
        self.metrics.append(H)

    @property
    def final(self) -> np.ndarray:
        return self.metrics[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "time", "residual", "functional", "min_eig", "max_eig"])
        for i, row in enumerate(zip(self.times, self.residuals, self.functional_values, self.min_eigs, self.max_eigs)):
            w.writerow([i] + [repr(float(v)) for v in row])
        return buf.getvalue()


def run_balancing_flow(model: ModelManifold, k: int, H0: np.ndarray, dt: float = 0.1, tol: float = 1e-8,
                       max_steps: int = 500, psi: Optional[MomentPolynomial] = None,
                       method: str = "closed") -> FlowTrajectory:
    """Adaptive balancing flow: halve dt when the functional rises, grow by 1.2 otherwise."""
    H = check_metric(H0)
    traj = FlowTrajectory()
    mm = moment_map(model, k, H, psi)
    fval = balancing_functional(model, k, H, psi, method=method)
    t = 0.0
    traj.record(t, mm.residual, fval, H)
    steps = 0
    while mm.residual >= tol and steps < max_steps:
        steps += 1
        new = balancing_flow_step(model, k, H, dt, psi, mm.mu0)
        fnew = balancing_functional(model, k, new, psi, method=method)
        mnew = moment_map(model, k, new, psi)
        # near the minimum the functional test is blind (changes ~ residual^2),
        # so an overshoot is also detected by a growing gradient norm
        if (fnew > fval + 1e-13 * max(1.0, abs(fval))
                or np.linalg.norm(mnew.mu0) > np.linalg.norm(mm.mu0)):
            dt *= 0.5
            if dt < 1e-14:
                break
            continue
        t += dt
        H, fval, mm = new, fnew, mnew
        w = np.linalg.eigvalsh(H)
        if w[0] <= EIG_FLOOR * w[-1]:
            raise FlowError("metric degenerated during balancing flow")
        traj.record(t, mm.residual, fval, H)
        dt *= 1.2
    traj.converged = mm.residual < tol
    return traj


def normalize_scale(H: np.ndarray) -> np.ndarray:
    """Representative with determinant one."""
    w = np.linalg.eigvalsh(H)
    return H / np.exp(np.mean(np.log(w)))


# ---------------------------------------------------------------------------
# J-flow on torus-invariant potentials
# ---------------------------------------------------------------------------

def _check_pde_model(model: ModelManifold):
    if model.kind not in ("P1", "P1xP1"):
        raise GeometryError("the J-flow is implemented on P1 and P1xP1")


@dataclass(frozen=True)
class PotentialGrid:
    values: np.ndarray
    spacing: float
    time: float = 0.0

    @property
    def points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.values.shape[0])

    def shifted(self, c: float) -> "PotentialGrid":
        return PotentialGrid(self.values + c, self.spacing, self.time)


def make_grid(model: ModelManifold, m: int, phi: Optional[MomentPolynomial] = None) -> PotentialGrid:
    """Uniform grid with ``m`` cells per direction, sampling ``phi`` (or zero)."""
    _check_pde_model(model)
    x = np.linspace(0.0, 1.0, m + 1)
    if model.n == 1:
        pts = x[:, None]
        shape = (m + 1,)
    else:
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        pts = np.stack([X1.reshape(-1), X2.reshape(-1)], axis=1)
        shape = (m + 1, m + 1)
    vals = np.zeros(shape) if phi is None else phi.derivs(pts)[0].reshape(shape)
    return PotentialGrid(vals, 1.0 / m)


def _trap_weights(m1: int, h: float) -> np.ndarray:
    w = np.full(m1, h)
    w[0] = w[-1] = h / 2
    return w


def _lap1(u: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Conservative ``(x(1-x) u_x)_x`` along an axis, half cells at the ends."""
    u = np.moveaxis(u, axis, 0)
    m1 = u.shape[0]
    xm = (np.arange(m1 - 1) + 0.5) * h
    pm = (xm * (1 - xm)).reshape((-1,) + (1,) * (u.ndim - 1))
    flux = pm * (u[1:] - u[:-1]) / h
    out = np.empty_like(u)
    out[1:-1] = (flux[1:] - flux[:-1]) / h
    out[0] = flux[0] / (h / 2)
    out[-1] = -flux[-1] / (h / 2)
    return np.moveaxis(out, 0, axis)


def _mixed(u: np.ndarray, h: float) -> np.ndarray:
    """``sqrt(p1 p2) u_12`` with centred differences; zero on the boundary."""
    m1 = u.shape[0]
    x = np.linspace(0.0, 1.0, m1)
    p = np.sqrt(x * (1 - x))
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4 * h * h)
    return out * p[:, None] * p[None, :]


def form_matrix(values: np.ndarray, h: float, degrees: Sequence[int]) -> np.ndarray:
    """Normalised form ``diag(d) + ddbar u`` on the grid (shape grid + (n, n))."""
    if values.ndim == 1:
        return (degrees[0] + _lap1(values, h, 0))[..., None, None]
    out = np.empty(values.shape + (2, 2))
    out[..., 0, 0] = degrees[0] + _lap1(values, h, 0)
    out[..., 1, 1] = degrees[1] + _lap1(values, h, 1)
    out[..., 0, 1] = out[..., 1, 0] = _mixed(values, h)
    return out


def _det(A):
    if A.shape[-1] == 1:
        return A[..., 0, 0]
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def _mix(X, A):
    if A.shape[-1] == 1:
        return X[..., 0, 0]
    return X[..., 0, 0] * A[..., 1, 1] + X[..., 1, 1] * A[..., 0, 0] - X[..., 0, 1] * A[..., 1, 0] - X[..., 1, 0] * A[..., 0, 1]


@dataclass(frozen=True)
class JFlowProblem:
    """Model plus the torus-invariant chi = reference(d2) + ddbar psi."""

    model: ModelManifold
    psi: Optional[MomentPolynomial] = None

    def __post_init__(self):
        _check_pde_model(self.model)

    @property
    def gamma(self) -> float:
        return float(self.model.gamma)

    def chi_matrix(self, grid: PotentialGrid) -> np.ndarray:
        psi_vals = make_grid(self.model, grid.values.shape[0] - 1, self.psi).values
        return form_matrix(psi_vals, grid.spacing, self.model.d2)

    def omega_matrix(self, grid: PotentialGrid) -> np.ndarray:
        return form_matrix(grid.values, grid.spacing, self.model.d1)

    def ratio(self, grid: PotentialGrid) -> np.ndarray:
        """``chi ^ omega_phi^(n-1) / omega_phi^n``."""
        om = self.omega_matrix(grid)
        chi = self.chi_matrix(grid)
        n = self.model.n
        return _mix(chi, om) / (n * _det(om))

    def kahler_violation(self, grid: PotentialGrid) -> Optional[tuple]:
        om = self.omega_matrix(grid)
        ok = (om[..., 0, 0] > 0) & (_det(om) > 0)
        if ok.all():
            return None
        return tuple(int(i) for i in np.argwhere(~ok)[0])

    def cfl(self, grid: PotentialGrid, c: float = 0.2) -> float:
        om = self.omega_matrix(grid)
        chi = self.chi_matrix(grid)
        if self.model.n == 1:
            kappa = np.max(np.abs(chi[..., 0, 0]) / om[..., 0, 0] ** 2)
        else:
            inv = np.linalg.inv(om)
            coef = 0.5 * np.einsum("...ij,...jk,...kl->...il", inv, chi, inv)
            kappa = 2 * np.max(np.abs(np.linalg.eigvalsh(0.5 * (coef + np.swapaxes(coef, -1, -2)))))
        return c * grid.spacing ** 2 / max(kappa, 1e-300)

    def weights(self, grid: PotentialGrid) -> np.ndarray:
        """Trapezoid weights of the reference volume ``omega^n`` on the grid."""
        m1 = grid.values.shape[0]
        w = _trap_weights(m1, grid.spacing)
        if self.model.n == 1:
            return w
        return np.outer(w, w)

    def mean_value_defect(self, grid: PotentialGrid) -> float:
        """``int (gamma omega_phi^n - chi ^ omega_phi^(n-1))`` in the c1 normalisation."""
        om = self.omega_matrix(grid)
        chi = self.chi_matrix(grid)
        vol_form = _det(om) if self.model.n == 1 else 2 * _det(om)
        return float(np.sum(self.weights(grid) * (self.gamma * vol_form - _mix(chi, om))))

    def j_hat(self, grid: PotentialGrid) -> float:
        """Closed-form energy decreased by the flow, on the grid."""
        n = self.model.n
        phi = grid.values
        w = self.weights(grid)
        om0 = form_matrix(np.zeros_like(phi), grid.spacing, self.model.d1)
        om = self.omega_matrix(grid)
        chi = self.chi_matrix(grid)
        if n == 1:
            top = om0[..., 0, 0] + om[..., 0, 0]
            return float(np.sum(w * phi * (-0.5 * self.gamma * top + chi[..., 0, 0])))
        top = 2 * _det(om0) + _mix(om0, om) + 2 * _det(om)
        lower = _mix(chi, om0) + _mix(chi, om)
        return float(np.sum(w * phi * (-(2 / 3) * self.gamma * top + lower)))


def jflow_residual(problem: JFlowProblem, grid: PotentialGrid) -> float:
    return float(np.max(np.abs(problem.ratio(grid) - problem.gamma)))


def jflow_step(problem: JFlowProblem, grid: PotentialGrid, dt: float) -> PotentialGrid:
    """Explicit Euler step of ``phi_t = gamma - chi ^ omega_phi^(n-1) / omega_phi^n``."""
    bad = problem.kahler_violation(grid)
    if bad is not None:
        raise FlowError(f"flow left the Kähler cone at node {bad}")
    if dt > problem.cfl(grid) * (1 + 1e-12):
        raise FlowError("dt exceeds the CFL bound")
    rhs = problem.gamma - problem.ratio(grid)
    new = PotentialGrid(grid.values + dt * rhs, grid.spacing, grid.time + dt)
    bad = problem.kahler_violation(new)
    if bad is not None:
        raise FlowError(f"flow left the Kähler cone at node {bad}")
    return new


@dataclass
class JFlowTrajectory:
    times: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    grid: Optional[PotentialGrid] = None
    converged: bool = False
    tag: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "time", "residual", "jhat"])
        for i, row in enumerate(zip(self.times, self.residuals, self.energies)):
            w.writerow([i] + [repr(float(v)) for v in row])
        return buf.getvalue()


def run_jflow(problem: JFlowProblem, grid: PotentialGrid, t_max: float, tol: float = 1e-6,
              record_every: int = 1, snapshot_times: Sequence[float] = (), stop_at_tol: bool = True,
              tag: str = "") -> JFlowTrajectory:
    """Integrate to ``t_max`` (or until the residual drops below ``tol``) at the CFL step."""
    traj = JFlowTrajectory(tag=tag)
    pending = sorted(float(s) for s in snapshot_times)
    step = 0

    def log(g):
        traj.times.append(g.time)
        traj.residuals.append(jflow_residual(problem, g))
        traj.energies.append(problem.j_hat(g))

    log(grid)
    if pending and pending[0] == 0.0:
        traj.snapshots[0.0] = grid
        pending.pop(0)
    while grid.time < t_max - 1e-15:
        res = jflow_residual(problem, grid)
        if stop_at_tol and res < tol and not pending:
            break
        dt = min(problem.cfl(grid), t_max - grid.time)
        if pending:
            dt = min(dt, pending[0] - grid.time)
        grid = jflow_step(problem, grid, dt)
        step += 1
        if pending and abs(grid.time - pending[0]) < 1e-12:
            traj.snapshots[pending.pop(0)] = grid
        if step % record_every == 0:
            log(grid)
    if traj.times[-1] != grid.time:
        log(grid)
    traj.grid = grid
    traj.converged = traj.residuals[-1] < tol
    return traj


# ---------------------------------------------------------------------------
# quantization comparison
# ---------------------------------------------------------------------------

def _tag(model: ModelManifold, phi0: Optional[MomentPolynomial], psi: Optional[MomentPolynomial]) -> str:
    h = hashlib.sha256(repr(model.to_dict()).encode())
    for p in (phi0, psi):
        h.update(b"|" + (np.ascontiguousarray(p.coeffs).tobytes() if p is not None else b"none"))
    return h.hexdigest()[:16]


def bergman_initial_metric(model: ModelManifold, k: int, phi0: Optional[MomentPolynomial] = None) -> np.ndarray:
    """Gram matrix of sections in ``L2(h_ref^k e^(-k phi0), omega_phi0^n)``."""
    _check_pde_model(model)
    rule = quadrature_rule(model)
    S, _ = sections_at(model, k, rule)
    gref = reference_form(model, rule)
    if phi0 is None:
        dens = np.ones(len(rule))
        weight = np.ones(len(rule))
    else:
        g = gref + ddbar_moment(model, rule, phi0)
        dens = top_density(model, g, gref)
        if np.any(dens <= 0):
            raise GeometryError("initial potential is not Kähler")
        weight = np.exp(-k * phi0.derivs(rule.x)[0])
    diag = (np.abs(S) ** 2).T @ (rule.weights * dens * weight)
    return np.diag(diag).astype(complex)


def run_quantized_flow(model: ModelManifold, k: int, t: float, phi0: Optional[MomentPolynomial] = None,
                       psi: Optional[MomentPolynomial] = None, dt: float = 0.0025) -> FlowTrajectory:
    """Fixed-step balancing flow from the Bergman initial metric up to time ``t``."""
    H = bergman_initial_metric(model, k, phi0)
    traj = FlowTrajectory(tag=_tag(model, phi0, psi))
    steps = int(round(t / dt))
    now = 0.0
    mm = moment_map(model, k, H, psi)
    traj.record(now, mm.residual, np.nan, H)
    for _ in range(steps):
        H = balancing_flow_step(model, k, H, t / steps, psi, mm.mu0)
        now += t / steps
        mm = moment_map(model, k, H, psi)
        traj.record(now, mm.residual, np.nan, H)
    return traj


def bergman_form_on_grid(model: ModelManifold, k: int, H: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Normalised form of ``(1/k) iota^* omega_FS`` at interior moment points (diagonal H)."""
    if np.any(H - np.diag(np.diag(H))):
        raise GeometryError("grid comparison needs a torus-invariant (diagonal) metric")
    mons = np.array(model.section_exponents(k), dtype=float)
    d = np.array(model.d1, dtype=float)
    c = 1.0 / np.diag(H).real
    # |s_j|^2 in the reference frame: prod x^a (1-x)^(d k - a)
    logw = np.log(c)[None, :] + sum(
        mons[None, :, a] * np.log(x[:, a:a + 1]) + (d[a] * k - mons[None, :, a]) * np.log1p(-x[:, a:a + 1])
        for a in range(model.n))
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    w /= w.sum(axis=1, keepdims=True)
    mean = w @ mons
    cov = np.einsum("pj,pja,pjb->pab", w, mons[None] - mean[:, None, :], mons[None] - mean[:, None, :]) / k
    p = np.sqrt(x * (1 - x))
    return cov / (p[:, :, None] * p[:, None, :])


def quantization_gap(model: ModelManifold, k: int, t: float, balancing: FlowTrajectory,
                     jflow: JFlowTrajectory) -> float:
    """Sup over interior grid nodes of ``|omega_k(t) - omega(t)|`` in the reference metric."""
    if balancing.tag != jflow.tag:
        raise FlowError("mismatched initial data")
    idx = int(np.argmin(np.abs(np.array(balancing.times) - t)))
    if abs(balancing.times[idx] - t) > 1e-9:
        raise FlowError(f"balancing trajectory has no snapshot at t={t}")
    if t not in jflow.snapshots:
        raise FlowError(f"J-flow trajectory has no snapshot at t={t}")
    grid = jflow.snapshots[t]
    om = form_matrix(grid.values, grid.spacing, model.d1)
    m1 = grid.values.shape[0]
    x = np.linspace(0.0, 1.0, m1)[1:-1]
    if model.n == 1:
        pts = x[:, None]
        flow_forms = om[1:-1]
    else:
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        pts = np.stack([X1.reshape(-1), X2.reshape(-1)], axis=1)
        flow_forms = om[1:-1, 1:-1].reshape(-1, 2, 2)
    berg = bergman_form_on_grid(model, k, balancing.metrics[idx], pts)
    return float(np.max(np.abs(berg - flow_forms)))


@dataclass
class GapResult:
    ks: List[int]
    gaps: List[float]
    t: float


def quantization_sweep(model: ModelManifold, ks: Sequence[int], t: float, phi0: Optional[MomentPolynomial] = None,
                       psi: Optional[MomentPolynomial] = None, grid_cells: int = 64,
                       dt: float = 0.0025) -> GapResult:
    problem = JFlowProblem(model, psi)
    grid = make_grid(model, grid_cells, phi0)
    jf = run_jflow(problem, grid, t, snapshot_times=[t], stop_at_tol=False, record_every=50,
                   tag=_tag(model, phi0, psi))
    gaps = []
    for k in ks:
        bf = run_quantized_flow(model, k, t, phi0, psi, dt)
        gaps.append(quantization_gap(model, k, t, bf, jf))
    return GapResult(list(ks), gaps, t)
