import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from droplet_lab.droplet import (
    CAP_COMPLEMENT, ELLIPSE, STRIP, EllipseGeometry, boundary_sample, build_droplet,
    classical_schwarz_S0, contains, parameter_identities, schwarz_zeros, spherical_schwarz_S,
    spherical_schwarz_S_meromorphic, verify_schwarz_identity,
)
from droplet_lab.geometry import INFINITY, PlanePoint, geodesic_distance, inverse_stereo, pushforward_density_weight
from droplet_lab.line_equilibrium import LineEquilibrium, PoleError, ProblemParams, RegimeError

from oracles import disk_polar_integral

postcritical_params = st.tuples(st.floats(1.1, 4.0), st.floats(0.05, 5.0)).filter(
    lambda ba: ba[1] > 1.0 / (ba[0] ** 2 - 1.0) + 0.05).map(lambda ba: ProblemParams(*ba))


# -- construction -----------------------------------------------------------

def test_build_examples():
    d = build_droplet(ProblemParams(2, 1))
    assert d.shape == ELLIPSE
    assert d.ellipse.p ** 2 == pytest.approx(1.25, abs=1e-14)
    assert d.ellipse.q ** 2 == pytest.approx(0.25, abs=1e-14)
    # 0.8 x^2 + 4 y^2 = 1
    z = np.array([1 / math.sqrt(0.8), 0.5j, 0.3 + 0.4j])
    assert np.allclose(d.ellipse.equation(z), 0.8 * z.real ** 2 + 4 * z.imag ** 2, atol=1e-14)

    s = build_droplet(ProblemParams(2, 1 / 3))
    assert s.shape == STRIP and s.half_width == pytest.approx(0.75, abs=1e-15)

    c = build_droplet(ProblemParams(2, 0.25))
    assert c.shape == CAP_COMPLEMENT
    for cap, pole in zip(c.caps, (2j, -2j)):
        assert cap.area == pytest.approx(1 / 6, abs=1e-14)
        assert np.allclose(cap.center.as_array(), inverse_stereo(pole), atol=1e-15)


def test_contains_examples():
    d = build_droplet(ProblemParams(2, 1))
    assert contains(d, 0) and not contains(d, 1.2)
    assert 0.8 * 1.2 ** 2 == pytest.approx(1.152)
    assert not contains(d, INFINITY)
    strip = build_droplet(ProblemParams(2, 1 / 3))
    assert contains(strip, INFINITY) and contains(strip, 100 + 0.75j) and not contains(strip, 0.76j)
    caps = build_droplet(ProblemParams(2, 0.25))
    assert contains(caps, INFINITY) and contains(caps, 0) and not contains(caps, 2j)
    assert contains(caps, PlanePoint.finite(5.0))


@given(postcritical_params)
def test_foci_are_the_support_endpoints(p):
    g = EllipseGeometry.from_params(p)
    assert g.r == pytest.approx(LineEquilibrium(p).A, rel=1e-12)
    assert g.p > g.q > 0


def test_ellipse_tends_to_the_strip():
    g = EllipseGeometry.from_params(ProblemParams(2, 1 / 3 + 1e-6))
    assert abs(g.q - 0.75) < 1e-3 and g.p > 10


def test_semi_axes_increase_with_t():
    b = 2.0
    t_cr = (b * b - 1) / (b * b + 1)
    ts = np.linspace(0.01, 0.99, 50) * t_cr
    axes = np.array([(g.p, g.q) for g in (EllipseGeometry.from_params(ProblemParams.from_t(b, t)) for t in ts)])
    assert np.all(np.diff(axes[:, 0]) > 0) and np.all(np.diff(axes[:, 1]) > 0)


def test_caps_are_tangent_at_the_north_pole_at_a_cr():
    d = build_droplet(ProblemParams(2, 1 / 3))
    for cap in d.caps:
        assert abs(geodesic_distance(cap.center.as_array(), [0, 0, 1]) - cap.geodesic_radius) < 1e-9
    # below a_cr the caps do not reach the pole
    for cap in build_droplet(ProblemParams(2, 0.25)).caps:
        assert geodesic_distance(cap.center.as_array(), [0, 0, 1]) > cap.geodesic_radius + 1e-3


# -- volume law ---------------------------------------------------------------

@pytest.mark.parametrize("b,a", [(2, 1), (3, 0.5), (1.5, 5), (1.2, 3)])
def test_volume_law_ellipse(b, a):
    g = build_droplet(ProblemParams(b, a)).ellipse
    area = disk_polar_integral(pushforward_density_weight, g.p, g.q)
    assert area == pytest.approx(1 / (1 + 2 * a), abs=1e-10)
    assert build_droplet(ProblemParams(b, a)).region().total_mass == pytest.approx(1 / (1 + 2 * a), abs=1e-10)


def test_volume_law_strip():
    p = ProblemParams(2, 1 / 3)
    w = build_droplet(p).half_width
    # int over |y| <= w of dx dy / (pi (1+x^2+y^2)^2) = int dy / (2 (1+y^2)^(3/2))
    area = integrate.quad(lambda y: 0.5 * (1 + y * y) ** -1.5, -w, w)[0]
    assert area == pytest.approx(1 / (1 + 2 * p.a), abs=1e-12)
    assert build_droplet(p).region().total_mass == pytest.approx(1 / (1 + 2 * p.a), abs=1e-10)


@pytest.mark.parametrize("b,a", [(2, 0.25), (3, 0.1), (1, 2.0)])
def test_volume_law_caps(b, a):
    d = build_droplet(ProblemParams(b, a))
    assert 1 - sum(c.area for c in d.caps) == pytest.approx(1 / (1 + 2 * a), abs=1e-14)
    assert d.region().total_mass == pytest.approx(1 / (1 + 2 * a), abs=1e-10)
    assert d.complement_region().total_mass == pytest.approx(2 * a / (1 + 2 * a), abs=1e-10)


# -- boundary samples ---------------------------------------------------------

def test_boundary_sample_axis_points():
    d = build_droplet(ProblemParams(2, 1))
    s = boundary_sample(d, 4)
    g = d.ellipse
    assert np.array_equal(s.z, np.array([g.p, 1j * g.q, -g.p, -1j * g.q]))
    with pytest.raises(ValueError):
        boundary_sample(d, 2)


@pytest.mark.parametrize("b,a", [(2, 1), (2, 1 / 3), (2, 0.25), (3, 0.5)])
def test_boundary_samples_lie_on_the_boundary(b, a):
    d = build_droplet(ProblemParams(b, a))
    s = boundary_sample(d, 101)
    assert len(s) == 101
    assert np.allclose(np.linalg.norm(s.xyz, axis=1), 1, atol=1e-12)
    assert np.all(d.contains(s.z) | (d.shape == CAP_COMPLEMENT))
    if d.shape == ELLIPSE:
        assert np.max(np.abs(d.ellipse.equation(s.z) - 1)) < 1e-12
        assert not np.any(d.contains(s.z * (1 + 1e-9)))
    elif d.shape == STRIP:
        assert np.allclose(np.abs(s.z.imag), d.half_width, atol=1e-15)
        assert not np.any(d.contains(s.z * (1 + 1e-9)))
    else:
        for k, x in enumerate(s.xyz):
            dist = [abs(geodesic_distance(x, c.center.as_array()) - c.geodesic_radius) for c in d.caps]
            assert min(dist) < 1e-12
    # the paired plane points project back to the sphere points
    for (pz, px) in s.pairs()[:5]:
        assert np.allclose(inverse_stereo(pz.value), px.as_array(), atol=1e-12)


# -- Schwarz functions --------------------------------------------------------

def test_classical_schwarz_examples():
    g = build_droplet(ProblemParams(2, 1)).ellipse
    assert classical_schwarz_S0(g, g.p) == pytest.approx(g.p, abs=1e-14)
    assert classical_schwarz_S0(g, 1j * g.q) == pytest.approx(-1j * g.q, abs=1e-14)
    z = g.p * math.cos(0.7) + 1j * g.q * math.sin(0.7)
    assert abs(classical_schwarz_S0(g, z) - np.conj(z)) < 1e-12
    with pytest.raises(ValueError):
        classical_schwarz_S0(g, 0.5)


def test_spherical_schwarz_examples():
    p = ProblemParams(2, 1)
    z = 1e4j * np.exp(0.3j)
    assert abs(z * spherical_schwarz_S(p, z) - 1) < 1e-3
    zeros = schwarz_zeros(p)
    assert zeros[0] == pytest.approx(1j * math.sqrt(15) / (2 * math.sqrt(3)), abs=1e-15)
    assert zeros[0].imag == pytest.approx(1.1180340, abs=1e-7)
    for z0 in zeros:
        assert abs(spherical_schwarz_S(p, z0)) < 1e-10
    g = build_droplet(p).ellipse
    s = g.point(2 * np.pi * np.arange(64) / 64 + 0.01)
    assert np.max(np.abs(spherical_schwarz_S(p, s) - np.conj(s) / (1 + np.abs(s) ** 2))) < 1e-10
    with pytest.raises(PoleError):
        spherical_schwarz_S(p, 2j)
    with pytest.raises(ValueError):
        spherical_schwarz_S(p, 0.5)
    with pytest.raises(RegimeError):
        spherical_schwarz_S(ProblemParams(2, 0.25), 1j)


@given(postcritical_params, st.floats(0.0, 2 * math.pi), st.floats(1.01, 4.0))
def test_spherical_schwarz_forms_agree(p, th, scale):
    g = EllipseGeometry.from_params(p)
    z = scale * g.point(th) + 1e-9j
    b = p.b
    if min(abs(z - 1j * b), abs(z + 1j * b), abs(z - 1j / b), abs(z + 1j / b)) < 1e-2:
        return
    S = spherical_schwarz_S(p, z)
    M = spherical_schwarz_S_meromorphic(p, z)
    assert abs(S - M) < 1e-12 * max(1.0, abs(S))


def test_parameter_identities_example():
    ids = parameter_identities(ProblemParams(2, 1))
    l, r = ids["zero_height"]
    assert l == pytest.approx(math.sqrt(1.25), abs=1e-15) and r == pytest.approx(math.sqrt(1.25), abs=1e-15)
    for l, r in ids.values():
        assert abs(l - r) < 1e-12


@pytest.mark.parametrize("b,a", [(2, 1), (3, 0.5), (1.5, 5)])
def test_verify_schwarz_identity_passes(b, a):
    rep = verify_schwarz_identity(ProblemParams(b, a))
    assert rep.passed and rep.max_equality_residual < 1e-10
    assert rep.details["focus_residual"] < 1e-12


def test_verify_schwarz_identity_needs_postcritical():
    with pytest.raises(RegimeError):
        verify_schwarz_identity(ProblemParams(2, 0.25))


def test_schwarz_identity_detects_a_wrong_ellipse():
    # perturbing the semi-axes must break the identity on the boundary
    p = ProblemParams(2, 1)
    g = EllipseGeometry.from_params(p)
    bad = EllipseGeometry(g.p * 1.01, g.q)
    s = g.point(np.linspace(0.1, 6.0, 32))
    S0 = classical_schwarz_S0(bad, s)
    assert np.max(np.abs(S0 / (1 + s * S0) - spherical_schwarz_S(p, s))) > 1e-4
