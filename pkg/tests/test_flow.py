import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jstab.bergman import balanced_residual
from jstab.flow import (
    FlowError, FlowTrajectory, JFlowProblem, balancing_flow_step, bergman_initial_metric, jflow_residual,
    jflow_step, make_grid, normalize_scale, quantization_gap, run_balancing_flow, run_jflow,
    run_quantized_flow,
)
from jstab.geometry import ModelManifold, MomentPolynomial

P1 = ModelManifold.create("P1")
P1P1 = ModelManifold.create("P1xP1", (1, 1), (1, 1))
PHI0_P1 = MomentPolynomial(np.array([0.0, 0.1, -0.1]))


def test_step_fixes_balanced_metric():
    H = balancing_flow_step(P1, 1, np.eye(2), 0.3)
    np.testing.assert_allclose(H, np.eye(2), atol=1e-10)


def test_step_preserves_determinant(rng):
    psi = MomentPolynomial(np.array([0.0, 0.0, 0.15]))
    H = np.diag(np.exp(rng.normal(size=3) * 0.3))
    new = balancing_flow_step(P1, 2, H, 0.05, psi)
    assert abs(np.log(np.linalg.det(new).real) - np.log(np.linalg.det(H).real)) < 1e-12


def test_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        balancing_flow_step(P1, 1, np.eye(2), 0.0)


def test_flow_from_balanced_start_takes_no_steps():
    traj = run_balancing_flow(P1P1, 1, np.eye(4))
    assert traj.converged and len(traj.times) == 1


def test_flow_converges_monotonically(rng):
    H0 = np.diag(np.exp(0.3 * rng.normal(size=4)))
    traj = run_balancing_flow(P1P1, 1, H0, tol=1e-8)
    assert traj.converged and traj.residuals[-1] < 1e-8
    assert np.all(np.diff(traj.functional_values) <= 1e-12)
    np.testing.assert_allclose(normalize_scale(traj.final), np.eye(4), atol=1e-6)


def test_flow_reports_non_convergence(rng):
    H0 = np.diag(np.exp(0.3 * rng.normal(size=4)))
    traj = run_balancing_flow(P1P1, 1, H0, max_steps=2)
    assert not traj.converged


def test_trajectory_csv():
    traj = FlowTrajectory()
    traj.record(0.0, 1.0, 2.0, np.eye(2))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "step,time,residual,functional,min_eig,max_eig"
    assert lines[1].startswith("0,0.0,1.0,2.0")


def test_normalize_scale(rng):
    H = np.diag(np.exp(rng.normal(size=3)))
    assert abs(np.linalg.det(normalize_scale(H)) - 1) < 1e-12


# -- J-flow ---------------------------------------------------------------

def test_jflow_stationary_when_chi_is_gamma_omega():
    for model in (P1, ModelManifold.create("P1xP1", (1, 1), (2, 1))):
        problem = JFlowProblem(model)
        grid = make_grid(model, 16)
        assert jflow_residual(problem, grid) < 1e-12
        new = jflow_step(problem, grid, problem.cfl(grid))
        np.testing.assert_allclose(new.values, grid.values, atol=1e-14)


def test_residual_of_reference_with_perturbed_chi():
    psi = MomentPolynomial(np.array([0.0, 0.0, 0.2]))
    problem = JFlowProblem(P1, psi)
    grid = make_grid(P1, 32)
    chi = problem.chi_matrix(grid)[:, 0, 0]
    assert jflow_residual(problem, grid) == pytest.approx(np.max(np.abs(chi - 1.0)))
    assert jflow_residual(problem, grid) > 0.1


@settings(max_examples=10, deadline=None)
@given(st.floats(-5, 5))
def test_translation_invariance(c):
    problem = JFlowProblem(P1)
    grid = make_grid(P1, 16, PHI0_P1)
    dt = problem.cfl(grid)
    assert jflow_residual(problem, grid.shifted(c)) == pytest.approx(jflow_residual(problem, grid), abs=1e-12)
    a = jflow_step(problem, grid, dt).values
    b = jflow_step(problem, grid.shifted(c), dt).values
    np.testing.assert_allclose(b - c, a, atol=1e-10)


def test_jflow_decays_on_p1():
    problem = JFlowProblem(P1)
    traj = run_jflow(problem, make_grid(P1, 32, PHI0_P1), t_max=5.0, tol=1e-6)
    assert traj.converged
    assert np.all(np.diff(traj.residuals) <= 1e-15)
    assert np.all(np.diff(traj.energies) <= 1e-15)


def test_mean_value_preserved():
    problem = JFlowProblem(P1)
    grid = make_grid(P1, 32, PHI0_P1)
    assert abs(problem.mean_value_defect(grid)) < 1e-12


def test_cfl_enforced():
    problem = JFlowProblem(P1)
    grid = make_grid(P1, 16, PHI0_P1)
    with pytest.raises(FlowError, match="CFL"):
        jflow_step(problem, grid, 10 * problem.cfl(grid))


def test_leaving_kahler_cone_detected():
    problem = JFlowProblem(P1)
    grid = make_grid(P1, 16, MomentPolynomial(np.array([0.0, 0.0, -3.0])))
    with pytest.raises(FlowError, match="Kähler cone"):
        jflow_step(problem, grid, 1e-6)


def test_snapshots_recorded():
    problem = JFlowProblem(P1)
    traj = run_jflow(problem, make_grid(P1, 16, PHI0_P1), t_max=0.3, snapshot_times=[0.1, 0.3],
                     stop_at_tol=False)
    assert sorted(traj.snapshots) == [0.1, 0.3]
    assert traj.snapshots[0.3].time == pytest.approx(0.3)


# -- quantization ---------------------------------------------------------

def test_bergman_initial_metric_is_balanced_for_reference():
    H = bergman_initial_metric(P1, 3)
    assert balanced_residual(P1, 3, H) < 1e-10


def test_gap_requires_matching_initial_data():
    bf = run_quantized_flow(P1, 2, 0.1, PHI0_P1, dt=0.05)
    jf = run_jflow(JFlowProblem(P1), make_grid(P1, 16), 0.1, snapshot_times=[0.1], stop_at_tol=False, tag="other")
    with pytest.raises(FlowError, match="mismatched initial data"):
        quantization_gap(P1, 2, 0.1, bf, jf)


def test_gap_constant_when_both_flows_are_stationary():
    from jstab.flow import _tag
    jf = run_jflow(JFlowProblem(P1), make_grid(P1, 16), 0.2, snapshot_times=[0.1, 0.2], stop_at_tol=False,
                   tag=_tag(P1, None, None))
    bf = run_quantized_flow(P1, 3, 0.2, dt=0.05)
    g1 = quantization_gap(P1, 3, 0.1, bf, jf)
    g2 = quantization_gap(P1, 3, 0.2, bf, jf)
    assert abs(g1 - g2) < 1e-12 and g1 < 1e-12
