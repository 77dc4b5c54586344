import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from droplet_lab.droplet import build_droplet
from droplet_lab.dynamics import (
    A_of_t, GrowthFamily, area_measure, c_of_t, coarea_density, direct_potentials, omega_t_balayage_form,
    omega_t_density, omega_t_measure, params_at, reconstruct_potentials, rho_t_build, semi_axes,
    verify_dynamics, verify_family, verify_growth_inequalities, verify_omega_t, verify_reconstruction,
    verify_rho_t,
)
from droplet_lab.line_equilibrium import LineEquilibrium, ProblemParams

from oracles import QUAD

B = 2.0
T = 1.0 / 3.0
T_CR = 0.6


# -- omega_t ----------------------------------------------------------------

def test_omega_t_example():
    assert A_of_t(B, T) == pytest.approx(1.0, abs=1e-14)
    assert omega_t_density(B, T, 0.0) == pytest.approx(3 * math.sqrt(5) / (4 * math.pi), abs=1e-14)


def test_omega_t_rejects_points_outside_the_interval():
    with pytest.raises(ValueError):
        omega_t_density(B, T, 1.0)
    with pytest.raises(ValueError):
        A_of_t(B, 0.6)
    with pytest.raises(ValueError):
        A_of_t(B, 0.0)


@pytest.mark.parametrize("t", [0.05, T, 0.55])
def test_omega_t_mass_by_quadrature(t):
    A = A_of_t(B, t)
    # s = A sin(th) absorbs the inverse square-root edges
    mass = integrate.quad(lambda th: omega_t_density(B, t, A * math.sin(th)) * A * math.cos(th),
                          -math.pi / 2 + 1e-15, math.pi / 2 - 1e-15, **QUAD)[0]
    assert abs(mass - 1.0) < 1e-10
    assert abs(omega_t_measure(B, t).total_mass - 1.0) < 1e-10


@given(st.floats(0.02, 0.98), st.floats(-0.999, 0.999))
@settings(max_examples=50, deadline=None)
def test_omega_t_equals_the_balayage_average(frac, u):
    t = frac * T_CR
    x = u * A_of_t(B, t)
    d = omega_t_density(B, t, x)
    assert abs(d - omega_t_balayage_form(B, t, x)) <= 1e-12 * max(1.0, d)


def test_omega_t_is_the_t_derivative_of_t_mu_V():
    x, h = 0.5, 1e-5
    f = lambda t: t * LineEquilibrium(params_at(B, t)).density(x)
    fd = (f(T + h) - f(T - h)) / (2 * h)
    assert abs(fd - omega_t_density(B, T, x)) < 1e-5


def test_omega_t_symmetry_and_positivity():
    for t in np.linspace(0.05, 0.95, 10) * T_CR:
        A = A_of_t(B, t)
        x = np.linspace(-A, A, 202)[1:-1]
        d = omega_t_density(B, t, x)
        assert np.all(d > 0)
        assert np.max(np.abs(d - d[::-1])) < 1e-12 * np.max(d)


def test_support_grows_toward_t_cr():
    assert A_of_t(B, 0.99 * T_CR) > A_of_t(B, 0.9 * T_CR)
    assert A_of_t(B, (1 - 1e-8) * T_CR) > 1e3


# -- rho_t ----------------------------------------------------------------------

def test_rho_t_mass_symmetry_and_positivity():
    rho = rho_t_build(B, T)
    assert abs(rho.total_mass - 1.0) < 1e-8
    tau = np.linspace(0.01, 6.2, 50)
    d = rho.density(tau)
    assert np.all(d > 0)
    assert np.max(np.abs(d - rho.density(-tau))) < 1e-8
    assert np.max(np.abs(d - rho.density(tau + math.pi))) < 1e-8


def test_rho_t_rejects_t_out_of_range():
    for t in (0.0, T_CR, 0.7):
        with pytest.raises(ValueError):
            rho_t_build(B, t)


def test_rho_t_balayage_property():
    rep = verify_rho_t(B, T)
    assert rep.passed, rep.summary()
    assert rep.details["balayage_residual"] < 1e-6


def test_rho_t_reproduces_exterior_harmonic_functions():
    # for h harmonic outside Omega(t) and bounded at infinity the balayage
    # satisfies int h d rho = (h(ib) + h(-ib)) / 2; take h = Re z^{-2}, Im z^{-3}
    rho = rho_t_build(B, T)
    for h, expected in ((lambda z: (z ** -2).real, -1 / B ** 2), (lambda z: (z ** -1).imag, 0.0),
                        (lambda z: (z ** -4).real, 1 / B ** 4)):
        val = integrate.quad(lambda s: h(rho.curve(s)) * rho.density(np.array([s]))[0], 0, 2 * math.pi,
                             **QUAD)[0]
        assert abs(val - expected) < 1e-9


def test_rho_t_matches_the_coarea_density():
    rho = rho_t_build(B, T)
    tau = np.linspace(0.1, 6.0, 8)
    assert np.allclose(rho.arclength_density(tau), coarea_density(B, T, tau), rtol=1e-8)


def test_c_prime_matches_finite_differences():
    rho = rho_t_build(B, T)
    h = 1e-4
    fd = (c_of_t(B, T + h) - c_of_t(B, T - h)) / (2 * h)
    assert abs(fd - rho.constant) < 1e-5


def test_growth_inequalities():
    rep = verify_growth_inequalities(B, T)
    assert rep.passed, rep.summary()
    assert rep.details["rho_omega_far_equality"] < 1e-6


def test_growth_inequalities_near_t_cr():
    rep = verify_growth_inequalities(B, 0.99 * T_CR, n_grid=100)
    assert rep.passed, rep.summary()


# -- reconstructions ------------------------------------------------------------

def test_reconstruction_at_z_10():
    I_rho, I_om = reconstruct_potentials(B, T, 10.0)
    D_om, D_v = direct_potentials(B, T, 10.0)
    assert abs(I_rho[0] - D_om[0]) < 1e-4 and abs(I_om[0] - D_v[0]) < 1e-4
    assert abs(I_rho[0] - I_om[0]) < 1e-4
    assert verify_reconstruction(B, T).passed


def test_reconstruction_vanishes_as_t_goes_to_zero():
    I_rho, I_om = reconstruct_potentials(B, 1e-6, 10.0, n_steps=16)
    assert abs(I_rho[0]) < 1e-5 and abs(I_om[0]) < 1e-5


def test_reconstruction_rejects_points_inside():
    with pytest.raises(ValueError):
        reconstruct_potentials(B, T, 0.0)


# -- the family -----------------------------------------------------------------

def test_family_nesting_and_mass_law():
    fam = GrowthFamily.uniform(B, 20)
    assert fam.nesting_violations() == 0
    assert np.max(np.abs(fam.mass_errors())) < 1e-7
    assert verify_family(B).passed


def test_family_rejects_bad_grids():
    with pytest.raises(ValueError):
        GrowthFamily(B, [0.2, 0.1])
    with pytest.raises(ValueError):
        GrowthFamily(B, [0.1, 0.7])


def test_family_records():
    rows = GrowthFamily.uniform(B, 4).records()
    assert [r["t"] for r in rows] == sorted(r["t"] for r in rows)
    for r in rows:
        assert abs(r["rho_mass"] - 1) < 1e-8 and abs(r["omega_mass"] - 1) < 1e-10
        assert abs(r["area_mass"] - r["t"]) < 1e-7 and r["rho_residual"] < 1e-6


def test_area_measure_is_the_droplet_measure():
    p, q = semi_axes(B, T)
    g = build_droplet(ProblemParams(B, 1.0)).ellipse
    assert (p, q) == pytest.approx((g.p, g.q), abs=1e-14)
    assert area_measure(B, T).total_mass == pytest.approx(1.0, abs=1e-10)


def test_verify_dynamics_all_pass():
    reps = verify_dynamics(B, T)
    assert [r.check_name for r in reps] == ["omega_t", "rho_t", "dynamics", "reconstruction", "growth-family"]
    assert all(r.passed for r in reps), [r.summary() for r in reps]
