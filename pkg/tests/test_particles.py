import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from droplet_lab.droplet import build_droplet
from droplet_lab.line_equilibrium import ProblemParams
from droplet_lab.particles import (
    Configuration, charge_vectors, config_record, continuum_energy, discrete_energy,
    empirical_density_check, energy_gradient, equal_area_cells, fraction_in_caps, fraction_inside,
    gradient_check, initial_points, minimize, mirror, read_csv, read_json, tangent_gradient,
    uniform_sphere, write_csv, write_json,
)
from droplet_lab.report import INCONCLUSIVE

P = ProblemParams(2, 1)


def pairwise_min(x):
    d = np.linalg.norm(x[:, None] - x[None], axis=-1)
    d[np.diag_indices(len(x))] = np.inf
    return d.min()


# -- energy -----------------------------------------------------------------

def test_antipodal_pair_without_field():
    x = np.array([[0, 0, 1.0], [0, 0, -1.0]])
    assert discrete_energy(x, None) == -math.log(2)


def test_fixed_pair_with_field():
    # charges at (0, +-4/5, 3/5); |x1 - p|^2 = 2, |x2 - p|^2 = 16/5
    assert np.allclose(charge_vectors(P), [[0, 0.8, 0.6], [0, -0.8, 0.6]], atol=1e-15)
    x = np.array([[1.0, 0, 0], [0, 0, -1.0]])
    expected = -0.5 * math.log(2) + 2 * (-math.log(2) - math.log(16 / 5))
    assert discrete_energy(x, P) == pytest.approx(expected, abs=1e-14)


def test_coincident_points_give_infinite_energy():
    x = np.array([[1.0, 0, 0], [1.0, 0, 0], [0, 1.0, 0]])
    assert discrete_energy(x, None) == math.inf
    assert discrete_energy(np.vstack([charge_vectors(P)[0], [0, 0, -1.0]]), P) == math.inf
    with pytest.raises(ValueError):
        energy_gradient(x, None)


def test_configuration_rejects_non_unit_points():
    with pytest.raises(ValueError):
        Configuration(np.array([[1.0, 0, 0], [0, 2.0, 0]]), 0.0, 0, False)
    with pytest.raises(ValueError):
        minimize(1, None)


def test_energy_matches_a_direct_double_loop():
    rng = np.random.default_rng(5)
    x = uniform_sphere(300, rng)
    e = 0.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            e -= math.log(np.linalg.norm(x[i] - x[j]))
    cv = charge_vectors(P)
    e += len(x) * sum(-P.a * math.log(np.linalg.norm(xi - c)) for xi in x for c in cv)
    assert discrete_energy(x, P) == pytest.approx(e, rel=1e-12)


def test_evaluation_is_identical_for_any_thread_count():
    x = uniform_sphere(500, np.random.default_rng(2))
    e1, g1 = discrete_energy(x, P, threads=1), energy_gradient(x, P, threads=1)
    e3, g3 = discrete_energy(x, P, threads=3), energy_gradient(x, P, threads=3)
    assert e1 == e3 and np.array_equal(g1, g3)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_exchange_symmetry(seed):
    rng = np.random.default_rng(seed)
    x = uniform_sphere(40, rng)
    perm = rng.permutation(40)
    assert discrete_energy(x[perm], P) == pytest.approx(discrete_energy(x, P), rel=1e-14, abs=1e-13)


def test_gradient_matches_finite_differences_along_the_trace():
    snaps = []
    minimize(60, P, seed=3, max_iters=40, snapshots=snaps)
    rng = np.random.default_rng(0)
    idx = np.linspace(0, len(snaps) - 1, 10).round().astype(int)
    for k in idx:
        assert gradient_check(snaps[k], P, rng) < 1e-5


def test_tangent_gradient_is_tangent():
    x = uniform_sphere(30, np.random.default_rng(1))
    gt = tangent_gradient(x, energy_gradient(x, P))
    assert np.max(np.abs(np.sum(gt * x, axis=1))) < 1e-12


# -- optimiser -----------------------------------------------------------------

def test_trace_is_monotone_and_points_stay_on_the_sphere():
    c = minimize(80, P, seed=1, max_iters=300)
    assert np.all(np.diff(c.trace) <= 0)
    assert np.max(np.abs(np.linalg.norm(c.points, axis=1) - 1)) < 1e-9
    assert c.energy == c.trace[-1] == discrete_energy(c, P)


def test_determinism():
    a = minimize(60, P, seed=7, max_iters=200)
    b = minimize(60, P, seed=7, max_iters=200)
    assert np.array_equal(a.points, b.points) and a.energy == b.energy and a.trace == b.trace
    c = minimize(60, P, seed=8, max_iters=200)
    assert not np.array_equal(a.points, c.points)


def test_restarts_return_the_best_run():
    # the restart seeds of a smaller run are a prefix of those of a larger one
    each = [minimize(40, P, seed=0, restarts=k, max_iters=100).energy for k in (1, 2, 3)]
    assert each[2] <= each[1] <= each[0]


def test_nonconvergence_is_reported():
    c = minimize(50, P, seed=0, max_iters=3)
    assert not c.converged and c.iterations == 3


def test_unconstrained_points_are_well_spread():
    c = minimize(50, None, seed=0)
    assert c.converged
    assert pairwise_min(c.points) > 0.25


def test_initial_points_favour_the_droplet():
    rng = np.random.default_rng(0)
    x = initial_points(500, P, rng)
    assert len(x) == 500
    assert np.mean(build_droplet(P).contains_sphere(x)) >= 0.9


def test_mirror_symmetry_of_a_converged_configuration():
    c = minimize(100, P, seed=0)
    e = discrete_energy(c, P)
    assert abs(discrete_energy(mirror(c), P) - e) <= 1e-9 * abs(e)


def test_small_run_concentrates_in_the_droplet():
    c = minimize(150, P, seed=0)
    assert fraction_inside(c, build_droplet(P)) >= 0.95
    q = ProblemParams(2, 0.25)
    c = minimize(150, q, seed=0)
    assert fraction_in_caps(c, q) <= 0.03


# -- empirical density ---------------------------------------------------------

def test_equal_area_cells():
    cells = equal_area_cells(4)
    assert len(cells) == 32
    areas = [(z1 - z0) * (f1 - f0) / (4 * math.pi) for z0, z1, f0, f1 in cells]
    assert np.allclose(areas, 1 / 32, atol=1e-15)


def test_uniform_input_is_uniform():
    x = uniform_sphere(20000, np.random.default_rng(4))
    rep = empirical_density_check(x, None, bins=4)
    assert rep.passed and rep.details["cells"] == 32 and rep.max_equality_residual < 0.15


def test_density_check_is_inconclusive_with_few_points():
    x = uniform_sphere(50, np.random.default_rng(4))
    rep = empirical_density_check(x, None, bins=4)
    assert rep.status == INCONCLUSIVE and not rep.passed


def test_cells_straddling_the_boundary_are_excluded():
    d = build_droplet(P)
    x = uniform_sphere(20000, np.random.default_rng(6))
    x = x[d.contains_sphere(x)]
    rep = empirical_density_check(x, d, bins=6)
    assert 0 < rep.details["cells"] < 72 and rep.passed


def test_continuum_energy_against_quadrature():
    # I_Q = l_a + int Q dmu with mu = (1+2a) lambda_D; the field integral is
    # done over the ellipse with a smooth tensor rule
    from droplet_lab.geometry import inverse_stereo, pushforward_density_weight
    from droplet_lab.potentials import verify_frostman_sphere
    from oracles import disk_polar_integral

    g = build_droplet(P).ellipse
    cv = charge_vectors(P)
    Q = lambda z: -P.a * sum(np.log(np.linalg.norm(inverse_stereo(z) - c, axis=-1)) for c in cv)
    int_Q = disk_polar_integral(lambda z: Q(z) * 3 * pushforward_density_weight(z), g.p, g.q)
    ell = verify_frostman_sphere(P, n_grid=50, plane_points=0).constants["ell_a"]
    assert continuum_energy(P) == pytest.approx(ell + int_Q, abs=1e-8)


# -- export ------------------------------------------------------------------

def test_csv_and_json_round_trip(tmp_path):
    c = minimize(30, P, seed=2, max_iters=50)
    write_csv(c, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "x1,x2,x3"
    assert np.array_equal(read_csv(tmp_path / "c.csv"), c.points)
    write_json(c, P, tmp_path / "c.json")
    back, rec = read_json(tmp_path / "c.json")
    assert np.array_equal(back.points, c.points) and back.energy == c.energy
    assert {k: rec[k] for k in ("N", "b", "a", "seed", "iterations")} == {
        "N": 30, "b": 2.0, "a": 1.0, "seed": 2, "iterations": c.iterations}
    assert config_record(c, None)["b"] is None


def test_csv_header_is_checked(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b,c\n1,0,0\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "bad.csv")
