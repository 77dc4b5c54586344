"""Acceptance criteria 1 to 10 at their stated tolerances.

Each test prints one PASS/FAIL line; the lines are repeated in the
terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, optimize

from droplet_lab.droplet import (
    CAP_COMPLEMENT, ELLIPSE, STRIP, EllipseGeometry, build_droplet, parameter_identities,
    verify_schwarz_identity,
)
from droplet_lab.dynamics import (
    A_of_t, GrowthFamily, omega_t_balayage_form, omega_t_density, omega_t_measure, verify_family,
    verify_reconstruction, verify_rho_t,
)
from droplet_lab.geometry import geodesic_distance, inverse_stereo, pushforward_density_weight
from droplet_lab.line_equilibrium import LineEquilibrium, ProblemParams
from droplet_lab.particles import (
    continuum_energy, discrete_energy, empirical_density_check, fraction_in_caps, fraction_inside, minimize,
    mirror,
)
from droplet_lab.potentials import (
    verify_frostman_sphere, verify_mother_body, verify_quadrature_domain, verify_stieltjes_identities,
)

from acceptance_log import record
from oracles import disk_polar_integral

THREE = [(2, 1), (2, 0.25), (3, 0.5)]


def test_criterion_01_ellipse_identity_chain():
    p = ProblemParams(2, 1)
    eq = LineEquilibrium(p)
    g = EllipseGeometry.from_params(p)
    errs = {"A": abs(eq.A - 1), "C": abs(eq.C - 11.25), "p2": abs(g.p ** 2 - 1.25),
            "q2": abs(g.q ** 2 - 0.25), "r2-A2": abs(g.r ** 2 - eq.A ** 2)}
    ok = max(errs.values()) <= 1e-12
    record(1, "ellipse identity chain", ok, f"max error {max(errs.values()):.1e} (tol 1e-12)")
    assert ok, errs


def test_criterion_02_schwarz_verification():
    rng = np.random.default_rng(2024)
    worst_s, worst_id = 0.0, 0.0
    for _ in range(10):
        b = rng.uniform(1.2, 4.0)
        a_cr = 1 / (b * b - 1)
        a = a_cr * rng.uniform(1.1, 4.0)
        p = ProblemParams(b, a)
        rep = verify_schwarz_identity(p, sample_count=256)
        worst_s = max(worst_s, rep.details["identity_residual"], rep.details["boundary_residual"])
        ids = parameter_identities(p)
        worst_id = max(worst_id, max(abs(l - r) for l, r in ids.values()), rep.details["focus_residual"])
    ok = worst_s < 1e-10 and worst_id <= 1e-12
    record(2, "Schwarz function", ok,
           f"10 random (b, a): identity {worst_s:.1e} (tol 1e-10), parameter identities {worst_id:.1e} (tol 1e-12)")
    assert ok


def test_criterion_03_frostman():
    out = []
    ok = True
    for b, a in THREE:
        rep = verify_frostman_sphere(ProblemParams(b, a), n_grid=400, tol=1e-6)
        ok &= rep.passed
        out.append(f"({b},{a}) l_a={rep.constants['ell_a']:.6f} res {rep.max_equality_residual:.1e} "
                   f"viol {rep.worst_inequality_violation:.1e}")
    record(3, "Frostman on the sphere", ok, "; ".join(out))
    assert ok


def test_criterion_04_mother_body():
    out = []
    ok = True
    for b, a in THREE:
        rep = verify_mother_body(ProblemParams(b, a), n_grid=400, tol=1e-6)
        d = rep.details
        good = (rep.passed and d["mass_error"] <= 1e-9 and d["equality_off_D"] <= 1e-6
                and d["inequality_on_D"] <= 1e-6 and d["dual_equality_on_D"] <= 1e-6
                and d["dual_inequality_off_D"] <= 1e-6)
        ok &= good
        out.append(f"({b},{a}) mass {d['mass_error']:.0e} eq {d['equality_off_D']:.0e} "
                   f"dual {d['dual_equality_on_D']:.0e}")
    record(4, "mother body", ok, "; ".join(out))
    assert ok


def test_criterion_05_volume_law():
    errs = {}
    # ellipse
    p = ProblemParams(2, 1)
    g = build_droplet(p).ellipse
    oracle = disk_polar_integral(pushforward_density_weight, g.p, g.q)
    errs["ellipse"] = max(abs(build_droplet(p).region().total_mass - 1 / 3), abs(oracle - 1 / 3))
    # strip
    p = ProblemParams(2, 1 / 3)
    d = build_droplet(p)
    assert d.shape == STRIP
    w = d.half_width
    oracle = integrate.quad(lambda y: 0.5 * (1 + y * y) ** -1.5, -w, w)[0]
    errs["strip"] = max(abs(d.region().total_mass - 0.6), abs(oracle - 0.6))
    # caps
    p = ProblemParams(2, 0.25)
    d = build_droplet(p)
    assert d.shape == CAP_COMPLEMENT
    errs["caps"] = max(abs(d.region().total_mass - 2 / 3), abs(1 - sum(c.area for c in d.caps) - 2 / 3))
    ok = max(errs.values()) <= 1e-6
    record(5, "volume law", ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (tol 1e-6)")
    assert ok


def test_criterion_06_stieltjes():
    rep = verify_stieltjes_identities(ProblemParams(2, 1), n=50, tol=1e-6)
    record(6, "Stieltjes identities", rep.passed,
           f"inside {rep.details['inside_residual']:.1e}, outside {rep.details['outside_residual']:.1e} "
           f"at 50 + 50 points (tol 1e-6)")
    assert rep.passed


def test_criterion_07_dynamics():
    b, t = 2.0, 1 / 3
    checks = {}
    checks["omega mass"] = (abs(omega_t_measure(b, t).total_mass - 1), 1e-10)
    A = A_of_t(b, t)
    x = A * np.cos(np.pi * (np.arange(400) + 0.5) / 400)
    checks["omega balayage"] = (float(np.max(np.abs(omega_t_density(b, t, x) - omega_t_balayage_form(b, t, x)))),
                                1e-12)
    checks["rho balayage"] = (verify_rho_t(b, t).details["balayage_residual"], 1e-6)
    checks["reconstruction"] = (verify_reconstruction(b, t, z=(10.0, 10j), n_steps=64).max_equality_residual,
                                1e-4)
    fam = GrowthFamily.uniform(b, 20)
    checks["nesting"] = (float(fam.nesting_violations()), 0.0)
    assert verify_family(b).passed
    ok = all(v <= tol for v, tol in checks.values())
    record(7, "dynamics", ok, ", ".join(f"{k} {v:.1e}" for k, (v, _) in checks.items()))
    assert ok


def test_criterion_08_quadrature_domain():
    out = []
    ok = True
    for b, a in THREE:
        rep = verify_quadrature_domain(ProblemParams(b, a), tol=1e-6, inequality_slack=1e-8)
        h = rep.details["harmonic_residuals"]
        n_harm = len(h) - 1
        good = rep.passed and n_harm == 12 and max(h.values()) <= 1e-6
        good &= rep.details["worst_subharmonic_margin"] >= -1e-8
        ok &= good
        out.append(f"({b},{a}) harmonic {max(h.values()):.0e} over {n_harm}, "
                   f"min margin {rep.details['worst_subharmonic_margin']:.1e}")
    record(8, "quadrature domain", ok, "; ".join(out))
    assert ok


@pytest.mark.slow
def test_criterion_09_particle_oracle():
    t0 = time.time()
    p = ProblemParams(2, 1)
    c400 = minimize(400, p, seed=0)
    inside = fraction_inside(c400, build_droplet(p), slack=0.03)
    q = ProblemParams(2, 0.25)
    c400q = minimize(400, q, seed=0)
    in_caps = fraction_in_caps(c400q, q, slack=0.03)
    c1000 = minimize(1000, p, seed=0)
    rep = empirical_density_check(c1000, build_droplet(p), bins=6, margin=0.1, tol=0.25)
    elapsed = time.time() - t0
    e = discrete_energy(c1000, p)
    ratio = (e / (1000 ** 2 / 2)) / continuum_energy(p)
    mirror_gap = abs(discrete_energy(mirror(c1000), p) - e) / abs(e)
    ok = inside >= 0.98 and in_caps <= 0.02 and rep.passed and elapsed <= 900
    record(9, "particle oracle", ok,
           f"inside ellipse {inside:.1%}, in caps {in_caps:.1%}, N=1000 cell deviation "
           f"{rep.max_equality_residual:.1%} over {rep.details['cells']} cells, energy ratio {ratio:.4f}, "
           f"mirror gap {mirror_gap:.0e}, {elapsed:.0f} s")
    assert ok
    assert abs(ratio - 1) < 0.1 and mirror_gap < 1e-9


def _cap_boundary_height(d, x):
    """Height of the lower edge of the upper cap above the real point ``x``."""
    cap = max(d.caps, key=lambda c: c.center.as_array()[1])
    c, r = cap.center.as_array(), cap.geodesic_radius
    f = lambda y: float(geodesic_distance(inverse_stereo(complex(x, y)), c)) - r
    return optimize.brentq(f, 0.0, d.params.b, xtol=1e-14)


def test_criterion_10_regime_continuity():
    b = 2.0
    a_cr = 1 / (b * b - 1)
    below, above, at = ProblemParams(b, a_cr - 1e-9), ProblemParams(b, a_cr + 1e-9), ProblemParams(b, a_cr)
    x = np.linspace(-5, 5, 101)
    dens = [LineEquilibrium(p).density(x) for p in (below, at, above)]
    crit = LineEquilibrium(at).density_critical_form(x)
    d_err = max(np.max(np.abs(dens[0] - dens[2])), np.max(np.abs(dens[1] - dens[0])),
                np.max(np.abs(crit - dens[2])))
    droplets = [build_droplet(p) for p in (below, at, above)]
    assert [d.shape for d in droplets] == [CAP_COMPLEMENT, STRIP, ELLIPSE]
    g = droplets[2].ellipse
    xs = np.linspace(-5, 5, 21)
    h_ell = g.q * np.sqrt(1 - (xs / g.p) ** 2)
    h_cap = np.array([_cap_boundary_height(droplets[0], xi) for xi in xs])
    h_strip = droplets[1].half_width
    b_err = max(np.max(np.abs(h_ell - h_cap)), np.max(np.abs(h_ell - h_strip)))
    m_err = abs(droplets[0].region().total_mass - droplets[2].region().total_mass)
    ok = d_err < 1e-5 and b_err < 1e-5 and m_err < 1e-5
    record(10, "regime continuity", ok,
           f"density {d_err:.1e}, boundary height {b_err:.1e}, area {m_err:.1e} at a_cr +- 1e-9 (tol 1e-5)")
    assert ok
