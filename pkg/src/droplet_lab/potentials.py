"""Potentials of every measure in play and the checks built on them.

Sphere measures:

* ``lambda_D`` and ``lambda_{D*}`` -- :meth:`Droplet.region` and
  :meth:`Droplet.complement_region`,
* ``sigma = a delta_{p1} + a delta_{p2}`` -- :func:`charge_measure`,
* ``sigma* = (1/2a) (phi^-1)_* mu_V`` -- :func:`build_mother_body`.

Each check returns a :class:`VerificationReport`. Constants are estimated as
the median over the equality set; residuals are measured against it.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .droplet import (
    CAP_COMPLEMENT,
    ELLIPSE,
    Droplet,
    EllipseGeometry,
    build_droplet,
)
from .geometry import (
    ELL0,
    LOG2,
    fibonacci_sphere,
    inverse_stereo,
    potential_transform_constant,
    pushforward_density_weight,
    stereo,
    unproject,
)
from .line_equilibrium import LineEquilibrium, ProblemParams, RegimeError
from .measures import AtomMeasure, EllipseMeasure, gauss_legendre
from .report import VerificationReport
from .sphere import SphereLineMeasure, SphereRegion

DEFAULT_TOL = 1e-6


class AtomHitError(ValueError):
    """The potential was requested at an atom of positive mass."""


# ---------------------------------------------------------------------------
# measures


class SphereAtoms:
    """Point masses on the sphere."""

    kind = "atoms"

    def __init__(self, points, weights):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.weights = np.asarray(weights, dtype=float)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x[..., None, :] - self.points, axis=-1)
        if np.any((d == 0) & (self.weights > 0)):
            raise AtomHitError("evaluation point coincides with an atom")
        return -np.sum(self.weights * np.log(d), axis=-1)

    def planar(self) -> AtomMeasure:
        z, inf = stereo(self.points)
        if np.any(inf):
            raise ValueError("an atom sits at the north pole")
        return AtomMeasure(list(z), list(self.weights))


def charge_measure(params: ProblemParams) -> SphereAtoms:
    p1, p2 = params.charge_points
    pts = np.array([unproject(p1).as_array(), unproject(p2).as_array()])
    return SphereAtoms(pts, [params.a, params.a])


def build_mother_body(params: ProblemParams) -> SphereLineMeasure:
    """``sigma*``: the lifted line equilibrium measure, scaled by ``1/(2a)``."""
    eq = LineEquilibrium(params)
    return SphereLineMeasure(eq.measure(), scale=1.0 / (2.0 * params.a))


def ellipse_area_measure(params: ProblemParams, scale: float = 1.0) -> EllipseMeasure:
    """``scale * phi_*(lambda_D)`` as an area density on the ellipse; with
    ``scale = 1+2a`` this is the probability measure ``mu_Omega``."""
    g = EllipseGeometry.from_params(params)
    return EllipseMeasure(g.p, g.q, lambda s: scale * pushforward_density_weight(s))


def mu_omega(params: ProblemParams) -> EllipseMeasure:
    return ellipse_area_measure(params, 1.0 + 2.0 * params.a)


# ---------------------------------------------------------------------------
# potentials


def log_potential(mu, z):
    """``int log(1/|z - s|) dmu(s)`` for a planar measure.

    Accepts a :class:`PlanePoint` or array of finite complex numbers.
    """
    from .geometry import PlanePoint

    if isinstance(z, PlanePoint):
        if z.infinite:
            raise ValueError("the potential of a positive measure is -inf at infinity")
        z = z.value
    z = np.asarray(z, dtype=complex)
    if isinstance(mu, AtomMeasure):
        loc = np.asarray(mu.locations, dtype=complex)
        hit = np.isclose(z[..., None], loc, rtol=0, atol=0) & (np.asarray(mu.weights) > 0)
        if np.any(hit):
            raise AtomHitError("evaluation point coincides with an atom")
    return mu.potential(z)


def planar_image(mu) -> tuple[object, float, float]:
    """``(planar measure, scale, log moment)`` with ``phi_* mu = scale * planar``
    and log moment ``int log(1 + |w|^2) d(phi_* mu)``."""
    if isinstance(mu, SphereLineMeasure):
        line = mu.line
        return line, mu.scale, mu.scale * float(line.integrate(lambda s: np.log1p(s * s)))
    if isinstance(mu, SphereAtoms):
        pl = mu.planar()
        loc = np.asarray(pl.locations)
        return pl, 1.0, float(np.sum(mu.weights * np.log1p(np.abs(loc) ** 2)))
    planar = getattr(mu, "planar", None)
    if isinstance(planar, EllipseMeasure):
        return planar, 1.0, float(planar.integrate(lambda s: np.log1p(np.abs(s) ** 2)))
    raise TypeError(f"no planar image available for {type(mu).__name__}")


def sphere_log_potential(mu, x, path: str = "direct"):
    """``int log(1/|x - y|) dmu(y)`` on the sphere.

    ``path="direct"`` integrates on the sphere; ``path="planar"`` projects
    the measure, evaluates its planar potential and applies the transport
    rule for potentials.
    """
    if isinstance(x, np.ndarray) or isinstance(x, (list, tuple)):
        x = np.asarray(x, dtype=float)
    else:
        x = x.as_array()
    if path == "direct":
        return mu.potential(x)
    if path != "planar":
        raise ValueError("path must be 'direct' or 'planar'")
    planar, scale, moment = planar_image(mu)
    z, inf = stereo(x)
    if np.any(inf):
        raise ValueError("the planar path cannot evaluate at the north pole")
    mass = mu.total_mass
    return (scale * planar.potential(z) + 0.5 * mass * np.log1p(np.abs(z) ** 2)
            + potential_transform_constant(mass, moment))


def cap_log_constant(r: float) -> float:
    """``c(r)`` in ``int_B log(1/|x-y|) d lambda = lambda(B) log(1/|x-p|) + c(r)``
    for ``x`` outside the cap ``B(p, r)``."""
    return 0.5 * (1.0 + math.cos(r)) * math.log(math.cos(0.5 * r)) + 0.25 * (1.0 - math.cos(r))


# ---------------------------------------------------------------------------
# grids


def split_grid(droplet: Droplet, n_in: int, n_out: int, guard: float = 1e-3,
               margin: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic near-uniform points inside ``D`` and in ``S^2 \\ D``.

    Points closer than ``guard`` to a charge are dropped. ``margin``
    removes points whose plane image lies within that relative distance of
    the boundary (only used for ellipses).
    """
    params = droplet.params
    charges = charge_measure(params).points
    m = 4 * (n_in + n_out)
    while True:
        x = fibonacci_sphere(m)
        near = np.min(np.linalg.norm(x[:, None, :] - charges, axis=-1), axis=1) < guard
        x = x[~near]
        inside = droplet.contains_sphere(x)
        if margin > 0 and droplet.shape == ELLIPSE:
            z, inf = stereo(x)
            e = droplet.ellipse.equation(np.where(inf, 0, z))
            band = (np.abs(np.sqrt(e) - 1.0) < margin) & ~inf
            inside_pts, outside_pts = x[inside & ~band], x[~inside & ~band]
        else:
            inside_pts, outside_pts = x[inside], x[~inside]
        if len(inside_pts) >= n_in and len(outside_pts) >= n_out:
            break
        m *= 2
    pick = lambda pts, n: pts[np.linspace(0, len(pts) - 1, n).round().astype(int)] if n else pts[:0]
    return pick(inside_pts, n_in), pick(outside_pts, n_out)


def _report(name, grid, constants, eq_res, ineq, tol, **details):
    return VerificationReport(name, grid, constants, float(eq_res), float(ineq), tol, details=details)


# ---------------------------------------------------------------------------
# checks


def verify_frostman_sphere(params: ProblemParams, n_grid: int = 400, tol: float = DEFAULT_TOL,
                           plane_points: int = 50) -> VerificationReport:
    """``(1+2a) U^{lambda_D} + Q`` is constant on ``D`` and at least that
    constant everywhere."""
    d = build_droplet(params)
    region = d.region()
    a = params.a
    Q = lambda x: charge_measure(params).potential(x)
    x_in, x_out = split_grid(d, n_grid, n_grid)
    F_in = (1.0 + 2.0 * a) * region.potential(x_in) + Q(x_in)
    F_out = (1.0 + 2.0 * a) * region.potential(x_out) + Q(x_out)
    ell = float(np.median(F_in))
    res = np.max(np.abs(F_in - ell))
    viol = np.max(ell - F_out)
    constants = {"ell_a": ell}
    details = {"interior_residual": float(res), "exterior_violation": float(viol)}
    if d.shape == ELLIPSE and plane_points:
        b = params.b
        z, _ = stereo(x_in[np.linspace(0, len(x_in) - 1, plane_points).round().astype(int)])
        G = (mu_omega(params).potential(z) - a * np.log(np.abs(z * z + b * b))
             + 0.5 * (1.0 + 2.0 * a) * np.log1p(np.abs(z) ** 2))
        c = float(np.median(G))
        pres = float(np.max(np.abs(G - c)))
        constants["c_plane"] = c
        details["plane_residual"] = pres
        res = max(res, pres)
    return _report("frostman", f"{len(x_in)} in D + {len(x_out)} off D", constants, res, viol, tol,
                   **details)


def verify_mother_body(params: ProblemParams, n_grid: int = 400, tol: float = DEFAULT_TOL,
                       mass_tol: float = 1e-9) -> VerificationReport:
    """Mother body relations for ``D`` and for ``D*`` and the constant of
    the dual energy problem."""
    d = build_droplet(params)
    a = params.a
    lam_D, lam_Ds = d.region(), d.complement_region()
    sigma_star = build_mother_body(params)
    sigma = charge_measure(params)
    x_in, x_out = split_grid(d, n_grid, n_grid)

    UD_in, UD_out = lam_D.potential(x_in), lam_D.potential(x_out)
    US_in, US_out = sigma_star.potential(x_in), sigma_star.potential(x_out)
    w = 2.0 * a / (1.0 + 2.0 * a)
    E_out = UD_out - w * US_out
    E_in = UD_in - w * US_in
    m = float(np.median(E_out))
    r1 = np.max(np.abs(E_out - m))
    v1 = np.max(E_in - m)

    UDs_in, UDs_out = lam_Ds.potential(x_in), lam_Ds.potential(x_out)
    Usig_in, Usig_out = sigma.potential(x_in), sigma.potential(x_out)
    Es_in = UDs_in - Usig_in / (1.0 + 2.0 * a)
    Es_out = UDs_out - Usig_out / (1.0 + 2.0 * a)
    ms = float(np.median(Es_in))
    r2 = np.max(np.abs(Es_in - ms))
    v2 = np.max(Es_out - ms)

    k = (1.0 + 2.0 * a) / (2.0 * a)
    target = k * (ELL0 - m)
    H_out = US_out + k * UDs_out
    H_in = US_in + k * UDs_in
    dual_const = float(np.median(H_out))
    r3 = np.max(np.abs(H_out - target))
    v3 = np.max(target - H_in)

    mass_err = abs(sigma_star.total_mass - 1.0 / (2.0 * a))
    mass_fail = mass_err > mass_tol
    res = max(r1, r2, r3)
    viol = max(v1, v2, v3, math.inf if mass_fail else -math.inf)
    return _report(
        "mother-body", f"{len(x_in)} in D + {len(x_out)} off D",
        {"m": m, "m_star": ms, "dual_constant": dual_const, "dual_constant_predicted": target,
         "sigma_star_mass": sigma_star.total_mass},
        res, viol, tol,
        equality_off_D=float(r1), inequality_on_D=float(v1),
        dual_equality_on_D=float(r2), dual_inequality_off_D=float(v2),
        dual_constant_residual=float(r3), dual_constant_inequality=float(v3), mass_error=mass_err,
    )


# -- quadrature over D and D* ---------------------------------------------


def _cap_rule(cap, n_r=64, n_psi=128):
    r, wr = gauss_legendre(n_r, 0.0, cap.geodesic_radius)
    psi = 2.0 * np.pi * np.arange(n_psi) / n_psi
    c = cap.center.as_array()
    from .geometry import tangent_frame

    e1, e2 = tangent_frame(c)
    dirs = np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2
    x = np.cos(r)[:, None, None] * c + np.sin(r)[:, None, None] * dirs[None]
    w = (np.sin(r) * wr)[:, None] * np.full(n_psi, 2.0 * np.pi / n_psi) / (4.0 * np.pi)
    return x.reshape(-1, 3), w.ravel()


def complement_rule(droplet: Droplet, n_r: int = 64, n_theta: int = 256):
    """Nodes on the sphere and weights for ``lambda`` restricted to ``D*``."""
    if droplet.shape == ELLIPSE:
        p, q = droplet.ellipse.p, droplet.ellipse.q
        th = 2.0 * np.pi * np.arange(n_theta) / n_theta
        rb = np.sqrt(np.cos(th) ** 2 / p ** 2 + np.sin(th) ** 2 / q ** 2)
        u, wu = gauss_legendre(n_r, 0.0, 1.0)
        rho = rb[None, :] * u[:, None]
        wch = rho * np.exp(1j * th)[None, :]
        # w = 1/z; the outside of the ellipse is star shaped about w = 0
        dens = 1.0 / (np.pi * (1.0 + rho ** 2) ** 2)
        wts = dens * rho * rb[None, :] * wu[:, None] * (2.0 * np.pi / n_theta)
        W = wch.ravel()
        den = 1.0 + np.abs(W) ** 2
        x = np.stack([2.0 * W.real / den, -2.0 * W.imag / den, (1.0 - np.abs(W) ** 2) / den], axis=-1)
        return x, wts.ravel()
    xs, ws = zip(*(_cap_rule(c) for c in droplet.caps))
    return np.concatenate(xs), np.concatenate(ws)


def droplet_rule(droplet: Droplet, n_r: int = 64, n_theta: int = 256):
    """Nodes and weights for ``lambda`` restricted to a bounded planar
    droplet (ellipse only)."""
    if droplet.shape != ELLIPSE:
        raise RegimeError("direct quadrature over D is implemented for the ellipse")
    g = droplet.ellipse
    em = EllipseMeasure(g.p, g.q, pushforward_density_weight)
    s, w = em.tensor_rule(n_r, n_theta)
    return inverse_stereo(s), w * pushforward_density_weight(s)


def _w_of(x):
    return (x[..., 0] - 1j * x[..., 1]) / (1.0 + x[..., 2])


def _z_of(x):
    return (x[..., 0] + 1j * x[..., 1]) / (1.0 - x[..., 2])


def harmonic_tests(droplet: Droplet, degree: int = 6) -> list[tuple[str, Callable]]:
    """Real and imaginary parts of ``(1/z)^k`` for ``k = 1..degree``.

    The origin lies in ``D`` in every regime, so these are harmonic and
    bounded on ``D*`` (they are the polynomials of the chart centred at the
    north pole).
    """
    var, name = _w_of, "1/z"
    tests = []
    for k in range(1, degree + 1):
        tests.append((f"Re ({name})^{k}", lambda x, k=k: np.real(var(x) ** k)))
        tests.append((f"Im ({name})^{k}", lambda x, k=k: np.imag(var(x) ** k)))
    return tests


def _poly_tests(var, name):
    polys = [
        ("|u|^2", lambda u: np.abs(u) ** 2),
        ("|u^2 + 0.3u + 0.1|^2", lambda u: np.abs(u * u + 0.3 * u + 0.1) ** 2),
        ("|(u - 0.2i)^3|^2", lambda u: np.abs((u - 0.2j) ** 3) ** 2),
    ]
    return [(f.replace("u", name), lambda x, f_=func: f_(var(x))) for f, func in polys]


def verify_quadrature_domain(params: ProblemParams, degree: int = 6, tol: float = DEFAULT_TOL,
                             inequality_slack: float = 1e-8) -> VerificationReport:
    """Quadrature identities for ``D*`` with nodes ``p1, p2`` and the
    generalised one for ``D`` with the mother body."""
    d = build_droplet(params)
    a = params.a
    sigma = charge_measure(params)
    p = sigma.points
    x, w = complement_rule(d)
    lhs_one = float(np.sum(w))
    eq_res = {"constant": abs(lhs_one - 2.0 * a / (1.0 + 2.0 * a))}
    for name, f in harmonic_tests(d, degree):
        lhs = float(np.sum(f(x) * w))
        rhs = a / (1.0 + 2.0 * a) * float(np.sum(f(p)))
        eq_res[name] = abs(lhs - rhs)

    margins = {}
    for name, f in _poly_tests(_w_of, "1/z"):
        lhs = float(np.sum(f(x) * w))
        rhs = a / (1.0 + 2.0 * a) * float(np.sum(f(p)))
        margins[f"D*: {name}"] = lhs - rhs
    # log kernels with the pole inside D (subharmonic on the closure of D*)
    lam_D, lam_Ds = d.region(), d.complement_region()
    x_in, x_out = split_grid(d, 8, 8, margin=0.05)
    lhs = lam_Ds.potential(x_in)
    rhs = sigma.potential(x_in) / (1.0 + 2.0 * a)
    for k in range(len(x_in)):
        margins[f"D*: log kernel, pole {k}"] = float(lhs[k] - rhs[k])
    # the droplet against the mother body
    sstar = build_mother_body(params)
    lhs = lam_D.potential(x_out)
    rhs = 2.0 * a / (1.0 + 2.0 * a) * sstar.potential(x_out)
    for k in range(len(x_out)):
        margins[f"D: log kernel, pole {k}"] = float(lhs[k] - rhs[k])
    if d.shape == ELLIPSE:
        xd, wd = droplet_rule(d)
        line = LineEquilibrium(params).measure()
        for name, f in _poly_tests(_z_of, "z"):
            lhs = float(np.sum(f(xd) * wd))
            rhs = float(line.integrate(lambda s: f(inverse_stereo(s + 0j)))) / (1.0 + 2.0 * a)
            margins[f"D: {name}"] = lhs - rhs
    worst = -min(margins.values())
    # the inequality has its own (tighter) slack; scale it into the report tolerance
    viol = worst if worst <= inequality_slack else math.inf
    return _report("quadrature-domain", f"{len(x)} nodes on D*, {len(eq_res) - 1} harmonic tests",
                   {"lambda_D_star": lhs_one}, max(eq_res.values()), viol, tol,
                   harmonic_residuals=eq_res, subharmonic_margins=margins,
                   worst_subharmonic_margin=-worst, inequality_slack=inequality_slack)


def stieltjes_points(params: ProblemParams, n: int = 50) -> tuple[np.ndarray, np.ndarray]:
    g = EllipseGeometry.from_params(params)
    k = np.arange(n)
    th = 2.0 * np.pi * ((k * 0.6180339887498949) % 1.0)
    kin = 0.05 + 0.85 * (k + 0.5) / n
    kout = 1.1 + 2.0 * (k + 0.5) / n
    z_in = kin * (g.p * np.cos(th) + 1j * g.q * np.sin(th))
    z_out = kout * (g.p * np.cos(th) + 1j * g.q * np.sin(th))
    return z_in, z_out


def verify_stieltjes_identities(params: ProblemParams, n: int = 50,
                                tol: float = DEFAULT_TOL) -> VerificationReport:
    """Cauchy transform of ``mu_Omega`` against its closed forms inside and
    outside the ellipse."""
    if not params.is_postcritical:
        raise RegimeError("the Stieltjes identities concern the ellipse droplet")
    b, a = params.b, params.a
    mu = mu_omega(params)
    eq = LineEquilibrium(params)
    z_in, z_out = stieltjes_points(params, n)
    closed_in = -2.0 * a * z_in / (z_in ** 2 + b * b) + (1.0 + 2.0 * a) * np.conj(z_in) / (1.0 + np.abs(z_in) ** 2)
    r_in = np.abs(mu.cauchy(z_in) - closed_in)
    r_out = np.abs(mu.cauchy(z_out) - eq.stieltjes(z_out))
    return _report("stieltjes", f"{n} inside + {n} outside", {}, max(r_in.max(), r_out.max()), 0.0, tol,
                   inside_residual=float(r_in.max()), outside_residual=float(r_out.max()))
