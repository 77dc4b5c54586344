"""Growth of the droplet in the parameter ``t = 1/(1+2a)``.

For fixed ``b`` the ellipses ``Omega(t)``, ``0 < t < t_cr``, increase with
``t``. The measures ``t mu_{Omega(t)}`` and ``t mu_{V(t)}`` have
``t``-derivatives

* ``rho_t`` -- a probability measure on the ellipse boundary, the balayage
  of ``(delta_{ib} + delta_{-ib})/2`` onto ``Omega(t)``, and
* ``omega_t`` -- a probability measure on ``[-A(t), A(t)]``, the average of
  the balayages of ``delta_{ib}`` and ``delta_{i/b}`` onto that interval.

``rho_t`` is obtained here by solving a first-kind boundary integral
equation (Nystrom discretisation with a logarithmic product rule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .droplet import build_droplet
from .line_equilibrium import LineEquilibrium, ProblemParams, balayage_point_to_interval
from .measures import CurveMeasure, EllipseMeasure, LineMeasure, gauss_legendre
from .geometry import pushforward_density_weight
from .report import VerificationReport

DEFAULT_NODES = 256


def _check_t(b: float, t: float):
    t_cr = (b * b - 1.0) / (b * b + 1.0)
    if not (0.0 < t < t_cr):
        raise ValueError(f"t must lie in (0, t_cr) = (0, {t_cr:.17g}), got {t}")


def a_of_t(t: float) -> float:
    return (1.0 - t) / (2.0 * t)


def semi_axes(b: float, t: float) -> tuple[float, float]:
    """``(p(t), q(t))``."""
    al, be = b * b + 1.0, b * b - 1.0
    return math.sqrt(al * t / (be - al * t)), math.sqrt(be * t / (al - be * t))


def semi_axes_t_derivative(b: float, t: float) -> tuple[float, float]:
    """``(d p^2/dt, d q^2/dt)``."""
    al, be = b * b + 1.0, b * b - 1.0
    return al * be / (be - al * t) ** 2, al * be / (al - be * t) ** 2


def A_of_t(b: float, t: float) -> float:
    _check_t(b, t)
    return math.sqrt(4.0 * b * b * t / (b ** 4 * (1.0 - t) ** 2 - (1.0 + t) ** 2))


def params_at(b: float, t: float) -> ProblemParams:
    return ProblemParams.from_t(b, t)


# ---------------------------------------------------------------------------
# omega_t


def omega_t_density(b: float, t: float, x):
    A = A_of_t(b, t)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= A):
        raise ValueError("x must lie strictly inside (-A(t), A(t))")
    root = np.sqrt(A * A - x * x)
    return (b * math.sqrt(A * A + b * b) / (x * x + b * b)
            + math.sqrt(A * A + b ** -2) / (b * (x * x + b ** -2))) / (2.0 * np.pi * root)


def omega_t_balayage_form(b: float, t: float, x):
    A = A_of_t(b, t)
    return 0.5 * (balayage_point_to_interval(b, A, x) + balayage_point_to_interval(1.0 / b, A, x))


def omega_t_measure(b: float, t: float) -> LineMeasure:
    A = A_of_t(b, t)

    def dens(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < A
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = omega_t_density(b, t, x[inside])
        return out

    return LineMeasure(dens, support=(-A, A), endpoint="invsqrt",
                       poles=(1j * b, -1j * b, 1j / b, -1j / b))


# ---------------------------------------------------------------------------
# rho_t


@lru_cache(maxsize=8)
def _kress_weights(nodes: int) -> np.ndarray:
    """``R[i, j]`` with ``int_0^{2 pi} log(4 sin^2((t_i - s)/2)) f(s) ds ~ sum_j R[i, j] f(t_j)``."""
    n = nodes // 2
    tau = 2.0 * np.pi * np.arange(nodes) / nodes
    m = np.arange(1, n)
    # the matrix is circulant: build one row and index it by (i - j) mod nodes
    row = -(2.0 * np.pi / n) * (np.cos(np.outer(tau, m)) @ (1.0 / m)) - (np.pi / n ** 2) * np.cos(n * tau)
    k = np.arange(nodes)
    R = row[(k[:, None] - k[None, :]) % nodes]
    R.setflags(write=False)
    return R


class BoundaryMeasure(CurveMeasure):
    """``rho_t`` on ``dOmega(t)``; ``psi`` is the density per unit of the
    ellipse parameter and ``constant`` the balayage constant ``c'(t)``."""

    def __init__(self, b, t, p, q, psi, constant):
        CurveMeasure.__init__(self, p, q, psi)
        self.b, self.t, self.constant = b, t, constant

    def potential(self, z, m: int | None = None):
        """Potential with the node count raised for points near the curve."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape)
        probe = self.curve(2.0 * np.pi * np.arange(2048) / 2048)
        dist = np.min(np.abs(flat[:, None] - probe[None, :]), axis=1)
        perim = np.sum(np.abs(np.diff(np.append(probe, probe[0]))))
        want = np.clip(60.0 * perim / np.maximum(dist, 1e-12), 1024, 2 ** 17)
        levels = 2 ** np.ceil(np.log2(want)).astype(int)
        for lev in np.unique(levels):
            sel = levels == lev
            out[sel] = CurveMeasure.potential(self, flat[sel], m=int(lev))
        return out.reshape(z.shape)

    def balayage_rhs(self, z):
        z = np.asarray(z, dtype=complex)
        return -0.5 * np.log(np.abs(z * z + self.b ** 2))


def rho_t_build(b: float, t: float, nodes: int = DEFAULT_NODES) -> BoundaryMeasure:
    """Solve ``U^rho = (1/2) log(1/|z^2+b^2|) + c`` on ``dOmega(t)``,
    ``rho(dOmega) = 1`` for the density and the constant."""
    _check_t(b, t)
    if nodes % 2:
        raise ValueError("nodes must be even")
    p, q = semi_axes(b, t)
    tau = 2.0 * np.pi * np.arange(nodes) / nodes
    g = p * np.cos(tau) + 1j * q * np.sin(tau)
    speed = np.hypot(p * np.sin(tau), q * np.cos(tau))
    d = tau[:, None] - tau[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        L2 = np.log(np.abs(g[:, None] - g[None, :])) - 0.5 * np.log(4.0 * np.sin(0.5 * d) ** 2)
    L2[np.diag_indices(nodes)] = np.log(speed)
    K = 0.5 * _kress_weights(nodes) + (2.0 * np.pi / nodes) * L2
    M = np.zeros((nodes + 1, nodes + 1))
    M[:nodes, :nodes] = -K
    M[:nodes, nodes] = -1.0
    M[nodes, :nodes] = 2.0 * np.pi / nodes
    rhs = np.zeros(nodes + 1)
    rhs[:nodes] = -0.5 * np.log(np.abs(g * g + b * b))
    rhs[nodes] = 1.0
    sol = np.linalg.solve(M, rhs)
    return BoundaryMeasure(b, t, p, q, sol[:nodes], float(sol[nodes]))


def coarea_density(b: float, t: float, tau):
    """Density of ``rho_t`` per unit arclength from the level-set description
    of the family of ellipses."""
    p, q = semi_axes(b, t)
    dp2, dq2 = semi_axes_t_derivative(b, t)
    tau = np.asarray(tau, dtype=float)
    x, y = p * np.cos(tau), q * np.sin(tau)
    Ft = -x * x * dp2 / p ** 4 - y * y * dq2 / q ** 4
    grad = np.hypot(2.0 * x / p ** 2, 2.0 * y / q ** 2)
    return np.abs(Ft) / (np.pi * grad * (1.0 + x * x + y * y) ** 2)


def area_measure(b: float, t: float) -> EllipseMeasure:
    """``mu_{Omega(t)}``."""
    p, q = semi_axes(b, t)
    return EllipseMeasure(p, q, lambda s: pushforward_density_weight(s) / t)


def c_of_t(b: float, t: float) -> float:
    """Constant of ``t U^{mu_Omega(t)} + (1-t)/2 log 1/|z^2+b^2| + log(1+|z|^2)/2``
    on ``Omega(t)``, read off at ``z = 0``."""
    return t * float(area_measure(b, t).potential(np.array([0j]))[0]) - (1.0 - t) * math.log(b)


# ---------------------------------------------------------------------------
# reconstructions


def reconstruct_potentials(b: float, t: float, z, n_steps: int = 64,
                           nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """``(int_0^t U^{rho_s}(z) ds, int_0^t U^{omega_s}(z) ds)``.

    The substitution ``s = t u^2`` grades the nodes toward ``s = 0``, where
    the measures shrink to a point.
    """
    _check_t(b, t)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p, q = semi_axes(b, t)
    if np.any((z.real / p) ** 2 + (z.imag / q) ** 2 <= 1.0):
        raise ValueError("z must lie outside Omega(t), where no support is crossed")
    u, wu = gauss_legendre(n_steps, 0.0, 1.0)
    s_nodes = t * u * u
    ds = 2.0 * t * u * wu
    I_rho = np.zeros(z.shape)
    I_om = np.zeros(z.shape)
    for s, w in zip(s_nodes, ds):
        I_rho += w * rho_t_build(b, s, nodes).potential(z)
        I_om += w * omega_t_measure(b, s).potential(z)
    return I_rho, I_om


def direct_potentials(b: float, t: float, z) -> tuple[np.ndarray, np.ndarray]:
    """``(t U^{mu_Omega(t)}(z), t U^{mu_V(t)}(z))``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    eq = LineEquilibrium(params_at(b, t))
    return t * area_measure(b, t).potential(z), t * eq.measure().potential(z)


# ---------------------------------------------------------------------------
# family


@dataclass
class GrowthFamily:
    b: float
    t_grid: np.ndarray

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        for t in self.t_grid:
            _check_t(self.b, t)

    @classmethod
    def uniform(cls, b: float, n: int, lo: float = 0.05, hi: float = 0.95) -> "GrowthFamily":
        t_cr = (b * b - 1.0) / (b * b + 1.0)
        return cls(b, np.linspace(lo * t_cr, hi * t_cr, n))

    @cached_property
    def droplets(self):
        return [build_droplet(params_at(self.b, t)) for t in self.t_grid]

    def a(self, t: float) -> float:
        return a_of_t(t)

    def nesting_violations(self, n_boundary: int = 256) -> int:
        """Boundary samples of ``Omega(t_k)`` not contained in ``Omega(t_{k+1})``."""
        bad = 0
        for d1, d2 in zip(self.droplets[:-1], self.droplets[1:]):
            z = d1.boundary_sample(n_boundary).z
            bad += int(np.sum(~d2.contains(z)))
        return bad

    def mass_errors(self) -> np.ndarray:
        return np.array([EllipseMeasure(*semi_axes(self.b, t), pushforward_density_weight).total_mass - t
                         for t in self.t_grid])

    def records(self, nodes: int = DEFAULT_NODES) -> list[dict]:
        """Per-``t`` summary rows."""
        rows = []
        for t in self.t_grid:
            p, q = semi_axes(self.b, t)
            rho = rho_t_build(self.b, float(t), nodes)
            inner = interior_points(self.b, float(t), 16)
            res = rho.potential(inner) - rho.balayage_rhs(inner)
            rows.append({
                "t": float(t), "a": a_of_t(t), "p": p, "q": q, "A": A_of_t(self.b, t),
                "area_mass": float(EllipseMeasure(p, q, pushforward_density_weight).total_mass),
                "rho_mass": rho.total_mass, "rho_constant": rho.constant,
                "rho_residual": float(np.max(np.abs(res - np.median(res)))),
                "omega_mass": omega_t_measure(self.b, t).total_mass,
            })
        return rows


def interior_points(b: float, t: float, n: int, scale: tuple[float, float] = (0.05, 0.9)) -> np.ndarray:
    p, q = semi_axes(b, t)
    k = np.arange(n)
    th = 2.0 * np.pi * ((k * 0.6180339887498949) % 1.0)
    kap = scale[0] + (scale[1] - scale[0]) * (k + 0.5) / n
    return kap * (p * np.cos(th) + 1j * q * np.sin(th))


def exterior_points(b: float, t: float, n: int, scale: tuple[float, float] = (1.02, 6.0),
                    guard: float = 1e-3) -> np.ndarray:
    z = interior_points(b, t, n, scale)
    poles = np.array([1j * b, -1j * b])
    d = np.min(np.abs(z[:, None] - poles), axis=1)
    return z[d > guard]


def verify_rho_t(b: float, t: float, n: int = 50, tol: float = 1e-6,
                 nodes: int = DEFAULT_NODES) -> VerificationReport:
    """Mass, symmetry, positivity and the balayage property of ``rho_t``."""
    rho = rho_t_build(b, t, nodes)
    z = interior_points(b, t, n)
    res = rho.potential(z) - rho.balayage_rhs(z)
    c = float(np.median(res))
    eq_res = float(np.max(np.abs(res - c)))
    mass_err = abs(rho.total_mass - 1.0)
    psi = rho.psi
    k = np.arange(nodes)
    sym = max(np.max(np.abs(psi - psi[(-k) % nodes])), np.max(np.abs(psi - psi[(k + nodes // 2) % nodes])))
    tau8 = 2.0 * np.pi * (np.arange(8) + 0.3) / 8
    coarea = coarea_density(b, t, tau8)
    nystrom = rho.arclength_density(tau8)
    co_err = float(np.max(np.abs(coarea - nystrom) / np.abs(coarea)))
    positivity = -float(np.min(psi))
    return VerificationReport(
        "rho_t", f"{n} interior points, {nodes} nodes",
        {"c_prime": rho.constant, "c_prime_median": c, "t": t},
        max(eq_res, mass_err, sym, co_err), positivity, tol,
        details={"balayage_residual": eq_res, "mass_error": mass_err, "symmetry_error": float(sym),
                 "coarea_relative_error": co_err},
    )


def verify_growth_inequalities(b: float, t_a: float, n_grid: int = 400, tol: float = 1e-6,
                               fd_step: float = 1e-4, nodes: int = DEFAULT_NODES) -> VerificationReport:
    """The three inequalities of the growth argument at ``t = t_a`` and the
    finite-difference check of ``c'(t)``."""
    _check_t(b, t_a)
    t = t_a
    rho = rho_t_build(b, t, nodes)
    om = omega_t_measure(b, t)
    z_in = interior_points(b, t, n_grid)
    z_out = exterior_points(b, t, n_grid)
    p, _ = semi_axes(b, t)

    # (i) U^rho against the balayage right-hand side
    g_in = rho.potential(z_in) - rho.balayage_rhs(z_in) - rho.constant
    g_out = rho.potential(z_out) - rho.balayage_rhs(z_out) - rho.constant
    r1, v1 = float(np.max(np.abs(g_in))), float(np.max(g_out))

    # (ii) U^rho <= U^omega everywhere, equal outside
    d_in = rho.potential(z_in) - om.potential(z_in)
    d_out = rho.potential(z_out) - om.potential(z_out)
    r2, v2 = float(np.max(np.abs(d_out))), float(max(np.max(d_in), np.max(d_out)))
    far = z_out[np.abs(z_out) > p + 0.5][:100]
    r2_far = float(np.max(np.abs(rho.potential(far) - om.potential(far)))) if far.size else 0.0

    # (iii) the full inequality for t U^{mu_Omega(t)}
    mu = area_measure(b, t)
    G = lambda z: (t * mu.potential(z) - 0.5 * (1.0 - t) * np.log(np.abs(z * z + b * b))
                   + 0.5 * np.log1p(np.abs(z) ** 2))
    G_in, G_out = G(z_in), G(z_out)
    c = float(np.median(G_in))
    r3, v3 = float(np.max(np.abs(G_in - c))), float(np.max(c - G_out))

    # c'(t) against finite differences of c(t)
    c_fd = (c_of_t(b, t + fd_step) - c_of_t(b, t - fd_step)) / (2.0 * fd_step)
    r4 = abs(c_fd - rho.constant)
    fd_tol = 1e-5
    return VerificationReport(
        "dynamics", f"{len(z_in)} inside + {len(z_out)} outside Omega(t)",
        {"t": t, "c": c, "c_prime": rho.constant, "c_prime_fd": c_fd},
        max(r1, r2, r3), max(v1, v2, v3, math.inf if r4 > fd_tol else -math.inf), tol,
        details={"balayage_equality": r1, "balayage_inequality": v1,
                 "rho_omega_equality_outside": r2, "rho_omega_far_equality": r2_far,
                 "rho_omega_inequality": v2, "full_equality": r3, "full_inequality": v3,
                 "c_prime_fd_error": r4},
    )


def verify_omega_t(b: float, t: float, n: int = 200, tol: float = 1e-10) -> VerificationReport:
    """Mass, balayage form, symmetry and positivity of ``omega_t``."""
    A = A_of_t(b, t)
    x = A * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    dens = omega_t_density(b, t, x)
    form_err = float(np.max(np.abs(dens - omega_t_balayage_form(b, t, x)) / dens))
    sym_err = float(np.max(np.abs(dens - omega_t_density(b, t, -x))))
    mass = omega_t_measure(b, t).total_mass
    return VerificationReport(
        "omega_t", f"{n} Chebyshev points in (-A, A)", {"A": A, "t": t, "mass": mass},
        max(abs(mass - 1.0), form_err, sym_err), -float(np.min(dens)), tol,
        details={"mass_error": abs(mass - 1.0), "balayage_form_error": form_err,
                 "symmetry_error": sym_err},
    )


def verify_reconstruction(b: float, t: float, z=(10.0,), n_steps: int = 64,
                          tol: float = 1e-4) -> VerificationReport:
    """s-integrals of ``U^{rho_s}`` and ``U^{omega_s}`` against the direct
    potentials outside ``Omega(t)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    I_rho, I_om = reconstruct_potentials(b, t, z, n_steps)
    D_om, D_v = direct_potentials(b, t, z)
    r_rho = float(np.max(np.abs(I_rho - D_om)))
    r_om = float(np.max(np.abs(I_om - D_v)))
    r_eq = float(np.max(np.abs(I_rho - I_om)))
    return VerificationReport(
        "reconstruction", f"{len(z)} points, {n_steps} s-steps",
        {"t": t, "int_rho": float(I_rho[0]), "int_omega": float(I_om[0]),
         "t_U_mu_Omega": float(D_om[0]), "t_U_mu_V": float(D_v[0])},
        max(r_rho, r_om, r_eq), -math.inf, tol,
        details={"rho_vs_area": r_rho, "omega_vs_line": r_om, "rho_vs_omega": r_eq},
    )


def verify_family(b: float, n: int = 20, tol: float = 1e-7, fd_step: float = 1e-5,
                  flow_tol: float = 1e-6) -> VerificationReport:
    """Nesting of ``Omega(t)`` on an ``n``-point grid, the mass law
    ``lambda-mass = t`` and its unit t-derivative."""
    fam = GrowthFamily.uniform(b, n)
    bad = fam.nesting_violations()
    mass_err = float(np.max(np.abs(fam.mass_errors())))
    t0 = float(fam.t_grid[n // 2])
    m = lambda t: EllipseMeasure(*semi_axes(b, t), pushforward_density_weight).total_mass
    flow = (m(t0 + fd_step) - m(t0 - fd_step)) / (2.0 * fd_step)
    flow_err = abs(flow - 1.0)
    return VerificationReport(
        "growth-family", f"{n} t-values in (0, t_cr)", {"mass_flow": flow},
        mass_err, math.inf if (bad or flow_err > flow_tol) else -math.inf, tol,
        details={"nesting_violations": bad, "mass_error": mass_err, "mass_flow_error": flow_err},
    )


def verify_dynamics(b: float, t: float, n_grid: int = 400, tol: float = 1e-6) -> list[VerificationReport]:
    """All growth checks at ``(b, t)``."""
    _check_t(b, t)
    p, _ = semi_axes(b, t)
    z = np.array([max(10.0, 2.0 * p + 1.0), 1j * max(10.0, 2.0 * p + 1.0)])
    return [
        verify_omega_t(b, t),
        verify_rho_t(b, t, tol=tol),
        verify_growth_inequalities(b, t, n_grid=n_grid, tol=tol),
        verify_reconstruction(b, t, z),
        verify_family(b),
    ]
