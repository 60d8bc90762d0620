import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jstab import energy
from jstab.energy import (
    BergmanPotential, Chi, EnergyError, InvariantDivisor, LinearPotential, MomentPotential, PotentialPath,
    algebraic_slope, asymptotic_slope_iaym, coercivity_margin, constant_potential, diverging_family,
    entropy, i_aym_divisor, i_energy, j_aym, j_aym_path, j_hat, j_hat_path, log_quadrature, mabuchi,
)
from jstab.geometry import ModelManifold
from jstab.polyalg import Polynomial, WeightVector

P1 = ModelManifold.create("P1")
P1P1 = ModelManifold.create("P1xP1", (1, 1), (1, 1))
P1P1_21 = ModelManifold.create("P1xP1", (1, 1), (2, 1))


def bergman(model, k, rng, spread=2.0):
    return BergmanPotential(model, k, rng.normal(0.0, spread, model.section_count(k)))


@pytest.mark.parametrize("model", [P1, P1P1])
def test_constants_vanish(model):
    c = constant_potential(model.n, 1.7)
    assert abs(j_hat(model, c)) < 1e-12
    assert abs(i_energy(model, c)) < 1e-12
    assert abs(j_aym(model, c)) < 1e-12
    assert abs(mabuchi(model, c)) < 1e-12


def test_closed_form_on_p1_relations(rng):
    # on a curve I = 2 J_AYM
    for _ in range(5):
        phi = bergman(P1, 3, rng)
        assert abs(i_energy(P1, phi) - 2 * j_aym(P1, phi)) < 1e-9 * max(1, i_energy(P1, phi))


@pytest.mark.parametrize("model", [P1, P1P1])
def test_energy_inequalities_on_random_potentials(model):
    rng = np.random.default_rng(7)
    n = model.n
    for _ in range(50):
        phi = bergman(model, int(rng.integers(1, 4)), rng, rng.uniform(0.1, 4))
        I, J = i_energy(model, phi), j_aym(model, phi)
        slack = 1e-8 * max(1.0, I)
        assert I >= -slack
        assert (n + 1) * J - I >= -slack
        assert I - (n + 1) / n * J >= -slack


def test_energy_inequalities_moment_potentials():
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi = MomentPotential(rng.uniform(-0.1, 0.1, (3, 3)))
        I, J = i_energy(P1P1, phi), j_aym(P1P1, phi)
        assert I >= -1e-12 and 3 * J - I >= -1e-10 and I - 1.5 * J >= -1e-10


def test_shifts_leave_energies_unchanged(rng):
    phi = bergman(P1P1, 2, rng)
    shifted = energy.ShiftedPotential(phi, 3.0)
    assert j_hat(P1P1_21, shifted) == pytest.approx(j_hat(P1P1_21, phi), abs=1e-8)
    assert i_energy(P1P1, shifted) == pytest.approx(i_energy(P1P1, phi), abs=1e-8)


@pytest.mark.parametrize("model", [P1, P1P1_21])
def test_path_matches_closed_form(model, rng):
    chi = Chi.of(model)
    for _ in range(3 if model.n == 1 else 1):
        phi = bergman(model, 2, rng, 1.0)
        closed = j_hat(model, phi, chi)
        assert j_hat_path(model, PotentialPath.linear(phi), chi) == pytest.approx(closed, abs=1e-6)
        assert j_aym_path(model, PotentialPath.linear(phi)) == pytest.approx(j_aym(model, phi), abs=1e-6)


def test_path_independence(rng):
    a = bergman(P1P1_21, 1, rng, 1.0)
    phi = bergman(P1P1_21, 1, rng, 1.0)
    bent = PotentialPath.polynomial([a, LinearPotential([(1.0, phi), (-1.0, a)])])
    straight = PotentialPath.linear(phi)
    assert j_hat_path(P1P1_21, bent) == pytest.approx(j_hat_path(P1P1_21, straight), abs=1e-6)


def test_jhat_with_chi_equal_gamma_omega_is_critical_at_zero(rng):
    zero = constant_potential(1, 0.0)
    assert j_hat(P1, zero) == 0
    # first variation vanishes: J(eps phi) = O(eps^2)
    phi = bergman(P1, 2, rng, 1.0)
    vals = [j_hat(P1, LinearPotential([(e, phi)])) for e in (1e-3, 2e-3)]
    assert abs(vals[1] / vals[0] - 4) < 1e-2


def test_entropy_nonnegative_and_zero_at_reference(rng):
    assert abs(entropy(P1P1, constant_potential(2, 0.0))) < 1e-12
    for _ in range(5):
        assert entropy(P1P1, bergman(P1P1, 2, rng)) >= -1e-10


def test_entropy_rejects_non_kahler():
    with pytest.raises(EnergyError, match="non-positive volume density"):
        entropy(P1, MomentPotential([0.0, 0.0, -3.0]))


def test_quadrature_refinement(rng):
    phi = bergman(P1P1, 2, rng, 3.0)
    coarse = i_energy(P1P1, phi)
    fine = i_energy(P1P1, phi, log_quadrature(2, phi.centers(), half_width=40, panel=1.5, order=16))
    assert abs(coarse - fine) < 1e-10 * max(1, abs(fine))


# -- divisors and slopes ---------------------------------------------------

def test_divisor_from_binary_form():
    assert InvariantDivisor.from_binary_form([0, 1]).points == (-math.inf,)
    assert InvariantDivisor.from_binary_form([1, 0]).points == (math.inf,)
    D = InvariantDivisor.from_binary_form([-4, 1])
    assert D.points == (pytest.approx(2 * math.log(4)),)


def test_divisor_energy_basic_paths():
    D = InvariantDivisor.point(0.3)
    assert i_aym_divisor(P1, D, PotentialPath.linear(constant_potential(1, 0.0))) == 0
    assert i_aym_divisor(P1, D, PotentialPath.linear(constant_potential(1, 2.0))) == pytest.approx(-2)
    face = InvariantDivisor.face(0, 1)
    assert i_aym_divisor(P1P1, face, PotentialPath.linear(constant_potential(2, 1.5))) == pytest.approx(-1.5)


def test_divisor_path_independence(rng):
    D = InvariantDivisor.face(1, 0)
    a, phi = bergman(P1P1, 1, rng, 1.0), bergman(P1P1, 1, rng, 1.0)
    bent = PotentialPath.polynomial([a, LinearPotential([(1.0, phi), (-1.0, a)])])
    assert i_aym_divisor(P1P1, D, bent) == pytest.approx(i_aym_divisor(P1P1, D, PotentialPath.linear(phi)), abs=1e-6)


def Z(i, n=2):
    return Polynomial.variable(i, n)


def test_algebraic_slopes():
    assert algebraic_slope(WeightVector.of([1, 0]), Z(1), 1) == -1
    assert algebraic_slope(WeightVector.of([1, 0]), Z(0), 1) == 0
    assert algebraic_slope(WeightVector.of([0, 1]), Z(0), 1) == -1


def test_numeric_slopes():
    res = asymptotic_slope_iaym(P1, Z(1), WeightVector.of([1, 0]))
    assert abs(res.numeric + 1) < 0.05
    res0 = asymptotic_slope_iaym(P1, Z(0), WeightVector.of([1, 0]))
    assert abs(res0.numeric) < 0.05


def test_slope_of_scalar_weights():
    res = asymptotic_slope_iaym(P1, Z(0) + Z(1), WeightVector.of([2, 2]))
    assert res.numeric == pytest.approx(-2, rel=1e-3)
    assert res.algebraic == -2


def test_slope_additivity():
    g = Z(1)
    a = asymptotic_slope_iaym(P1, g, WeightVector.of([1, 0])).numeric
    b = asymptotic_slope_iaym(P1, g, WeightVector.of(["w", "0"], 2)).numeric
    ab = asymptotic_slope_iaym(P1, g, WeightVector.of(["1+w", "0"], 2)).numeric
    assert abs(ab - (a + b)) < 1e-3 * abs(ab)


# -- coercivity --------------------------------------------------------------

def test_margin_when_chi_is_gamma_omega():
    fam = diverging_family(P1P1, 1, [0, 1, 2, 3], [0, 1, 5, 20, 100, 300])
    rep = coercivity_margin(P1P1, None, fam)
    assert max(i for i, _ in rep.samples) > 1e3
    assert rep.margin >= -1e-6


def test_margin_gamma_zero_branch_bounded():
    chi = Chi.of(P1P1, (1, -1))
    assert chi.gamma(P1P1) == 0
    fam = diverging_family(P1P1, 1, [0, 1, 2, 3], [0, 1, 5, 20, 100])
    rep = coercivity_margin(P1P1, chi, fam)
    assert np.isfinite(rep.margin) and rep.margin > -1


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_sup_normalised_i_nonnegative(lam):
    fam = diverging_family(P1P1, 1, lam, [1.0])
    rep = coercivity_margin(P1P1, None, fam)
    assert rep.samples[0][0] >= -1e-9
