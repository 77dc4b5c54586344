"""The droplet in each regime.

* postcritical: an ellipse ``x^2/p^2 + y^2/q^2 <= 1`` in the plane whose
  foci are the endpoints ``+-A`` of the line equilibrium support,
* critical: the strip ``|Im z| <= (b^2 - 1)/(2b)``,
* subcritical: the sphere minus two open caps centred at the charges.

The sphere preimage ``D`` and its closed complement ``D*`` are available as
:class:`~droplet_lab.sphere.SphereRegion` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    NORTH,
    INFINITY,
    PlanePoint,
    SpherePoint,
    SphericalCap,
    cap_radius_for_area,
    inverse_stereo,
    pushforward_density_weight,
    stereo,
    unproject,
)
from .line_equilibrium import (
    CRITICAL,
    POSTCRITICAL,
    SUBCRITICAL,
    LineEquilibrium,
    PoleError,
    ProblemParams,
    RegimeError,
    sqrt_cut,
)
from .measures import EllipseMeasure
from .report import VerificationReport
from .sphere import SphereRegion, cap_curves, planar_curve, reversed_curve

ELLIPSE = "ellipse"
STRIP = "strip"
CAP_COMPLEMENT = "cap_complement"

# closed-set membership absorbs rounding of points computed on the boundary
_CLOSED_SLACK = 1e-12


@dataclass(frozen=True)
class EllipseGeometry:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > self.q > 0):
            raise ValueError("need p > q > 0")

    @property
    def r(self) -> float:
        return math.sqrt(self.p ** 2 - self.q ** 2)

    @classmethod
    def from_params(cls, params: ProblemParams) -> "EllipseGeometry":
        if not params.is_postcritical:
            raise RegimeError("the droplet is an ellipse only above a_cr")
        b, a = params.b, params.a
        p2 = (b * b + 1.0) / (2.0 * (b * b * a - a - 1.0))
        q2 = (b * b - 1.0) / (2.0 * (b * b * a + a + 1.0))
        return cls(math.sqrt(p2), math.sqrt(q2))

    def equation(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real / self.p) ** 2 + (z.imag / self.q) ** 2

    def point(self, s):
        return self.p * np.cos(s) + 1j * self.q * np.sin(s)


@dataclass(frozen=True)
class BoundarySample:
    z: np.ndarray
    xyz: np.ndarray

    def __len__(self):
        return self.z.size

    def pairs(self) -> list[tuple[PlanePoint, SpherePoint]]:
        out = []
        for zk, xk in zip(self.z, self.xyz):
            pz = INFINITY if not np.isfinite(zk) else PlanePoint.finite(zk)
            out.append((pz, SpherePoint.from_array(xk)))
        return out


@dataclass(frozen=True)
class Droplet:
    params: ProblemParams
    shape: str
    ellipse: EllipseGeometry | None = None
    half_width: float | None = None
    caps: tuple[SphericalCap, ...] = field(default=())

    # -- membership ---------------------------------------------------------
    def contains(self, z) -> bool | np.ndarray:
        """Closed-droplet membership for a :class:`PlanePoint` or an array
        of finite complex numbers."""
        if isinstance(z, PlanePoint):
            if z.infinite:
                return self.shape != ELLIPSE
            return bool(self.contains(np.asarray(z.value)))
        z = np.asarray(z, dtype=complex)
        if self.shape == ELLIPSE:
            return self.ellipse.equation(z) <= 1.0 + _CLOSED_SLACK
        if self.shape == STRIP:
            return np.abs(z.imag) <= self.half_width * (1.0 + _CLOSED_SLACK)
        return self.contains_sphere(inverse_stereo(z))

    def contains_sphere(self, xyz) -> np.ndarray:
        xyz = np.asarray(xyz, dtype=float)
        if self.shape == ELLIPSE:
            z, inf = stereo(xyz)
            with np.errstate(invalid="ignore"):
                inside = self.ellipse.equation(np.where(inf, 0, z)) <= 1.0 + _CLOSED_SLACK
            return inside & ~inf
        out = np.ones(xyz.shape[:-1], dtype=bool)
        for cap in self.caps:
            out &= ~cap.contains(xyz)
        return out

    def complement_contains_sphere(self, xyz) -> np.ndarray:
        """Membership in the closed complement ``D*``."""
        xyz = np.asarray(xyz, dtype=float)
        if self.shape == ELLIPSE:
            z, inf = stereo(xyz)
            with np.errstate(invalid="ignore"):
                outside = self.ellipse.equation(np.where(inf, 0, z)) >= 1.0 - _CLOSED_SLACK
            return outside | inf
        out = np.zeros(xyz.shape[:-1], dtype=bool)
        for cap in self.caps:
            c = cap.center.as_array()
            out |= np.sum(xyz * c, axis=-1) >= math.cos(cap.geodesic_radius)
        return out

    # -- sphere regions -------------------------------------------------------
    def _ellipse_curve(self):
        p, q = self.ellipse.p, self.ellipse.q
        # the projection reverses orientation, so trace the ellipse clockwise
        return planar_curve(lambda s: p * np.cos(s) - 1j * q * np.sin(s),
                            lambda s: -p * np.sin(s) - 1j * q * np.cos(s))

    def region(self) -> SphereRegion:
        """Normalised Lebesgue measure on ``D``."""
        if self.shape == ELLIPSE:
            region = SphereRegion([self._ellipse_curve()], self.contains_sphere, name="D")
            g = self.ellipse
            region.planar = EllipseMeasure(g.p, g.q, pushforward_density_weight)
            return region
        return SphereRegion(cap_curves(self.caps), self.contains_sphere, name="D")

    def complement_region(self) -> SphereRegion:
        """Normalised Lebesgue measure on ``D*``."""
        if self.shape == ELLIPSE:
            curves = [reversed_curve(self._ellipse_curve())]
        else:
            curves = [cap.boundary for cap in self.caps]
        return SphereRegion(curves, self.complement_contains_sphere, name="D*")

    # -- boundary -----------------------------------------------------------
    def boundary_sample(self, n: int) -> BoundarySample:
        if n < 3:
            raise ValueError("n must be at least 3")
        if self.shape == ELLIPSE:
            s = 2.0 * np.pi * np.arange(n) / n
            c, sn = np.cos(s), np.sin(s)
            # snap rounding noise so axis points land exactly on the axes
            for v in (c, sn):
                v[np.abs(v) < 1e-15] = 0.0
                v[np.abs(np.abs(v) - 1.0) < 1e-15] = np.sign(v[np.abs(np.abs(v) - 1.0) < 1e-15])
            z = self.ellipse.p * c + 1j * self.ellipse.q * sn
            return BoundarySample(z, inverse_stereo(z))
        if self.shape == STRIP:
            m = n // 2
            w = self.half_width
            top = np.tan(np.pi * (np.arange(m) + 0.5) / m - 0.5 * np.pi)
            bottom = np.tan(np.pi * (np.arange(n - m) + 0.5) / (n - m) - 0.5 * np.pi)
            z = np.concatenate([top + 1j * w, bottom - 1j * w])
            return BoundarySample(z, inverse_stereo(z))
        m = n // 2
        counts = (m, n - m)
        xyz = []
        for cap, k in zip(self.caps, counts):
            # offset by half a step so the tangency point N is never emitted
            s = 2.0 * np.pi * (np.arange(k) + 0.5) / k
            xyz.append(cap.boundary(s)[0])
        xyz = np.concatenate(xyz)
        z, _ = stereo(xyz)
        return BoundarySample(z, xyz)


def cap_pair(params: ProblemParams, a: float | None = None) -> tuple[SphericalCap, SphericalCap]:
    """Caps of area ``a/(1+2a)`` centred at the sphere charges."""
    a = params.a if a is None else a
    r = cap_radius_for_area(a / (1.0 + 2.0 * a))
    p1, p2 = params.charge_points
    return (SphericalCap(unproject(p1), r), SphericalCap(unproject(p2), r))


def build_droplet(params: ProblemParams) -> Droplet:
    regime = params.regime
    if regime == POSTCRITICAL:
        return Droplet(params, ELLIPSE, ellipse=EllipseGeometry.from_params(params))
    if regime == CRITICAL:
        b = params.b
        return Droplet(params, STRIP, half_width=(b * b - 1.0) / (2.0 * b),
                       caps=cap_pair(params, params.a_cr))
    return Droplet(params, CAP_COMPLEMENT, caps=cap_pair(params))


def contains(droplet: Droplet, z) -> bool | np.ndarray:
    return droplet.contains(z)


def boundary_sample(droplet: Droplet, n: int) -> BoundarySample:
    return droplet.boundary_sample(n)


# ---------------------------------------------------------------------------
# Schwarz functions


def classical_schwarz_S0(geom: EllipseGeometry, z):
    """Schwarz function of the ellipse, ``= conj(z)`` on the boundary."""
    z = np.asarray(z, dtype=complex)
    r = geom.r
    if np.any((np.abs(z.imag) == 0) & (np.abs(z.real) <= r)):
        raise ValueError("z lies on the focal segment [-r, r]")
    p, q = geom.p, geom.q
    return ((p * p + q * q) * z - 2.0 * p * q * sqrt_cut(z, r)) / (r * r)


def _check_S_domain(params: ProblemParams, z, A: float):
    z = np.asarray(z, dtype=complex)
    b = params.b
    if np.any(np.abs(z * z + b * b) <= 1e-14 * b * b):
        raise PoleError("S has poles at +-ib")
    if np.any((z.imag == 0) & (np.abs(z.real) <= A)):
        raise ValueError("z lies on the cut [-A, A]")
    return z


def spherical_schwarz_S(params: ProblemParams, z):
    """``(2az/(z^2+b^2) + F(z))/(1+2a)``, ``= conj(z)/(1+|z|^2)`` on the
    boundary of the ellipse."""
    eq = LineEquilibrium(params)
    if not eq.bounded:
        raise RegimeError("the spherical Schwarz function is defined above a_cr")
    z = _check_S_domain(params, z, eq.A)
    b, a = params.b, params.a
    return (2.0 * a * z / (z * z + b * b) + eq.stieltjes(z)) / (1.0 + 2.0 * a)


def spherical_schwarz_S_meromorphic(params: ProblemParams, z):
    """The same function written through ``(z^2 - A^2)^(1/2)``."""
    eq = LineEquilibrium(params)
    if not eq.bounded:
        raise RegimeError("the spherical Schwarz function is defined above a_cr")
    z = _check_S_domain(params, z, eq.A)
    b, a = params.b, params.a
    z2 = z * z
    if np.any(np.abs(z2 + b ** -2) <= 1e-14):
        raise PoleError("the meromorphic form has removable poles at +-i/b")
    val = (a * z / (z2 + b * b) + (1.0 + a) * z / (z2 + b ** -2)
           - math.sqrt(eq.C) * sqrt_cut(z, eq.A) / ((z2 + b * b) * (z2 + b ** -2)))
    return val / (1.0 + 2.0 * a)


def schwarz_zeros(params: ProblemParams) -> tuple[complex, complex]:
    b, a = params.b, params.a
    y = math.sqrt(b ** 4 - 1.0) / (b * math.sqrt(1.0 + 2.0 * a))
    return 1j * y, -1j * y


def parameter_identities(params: ProblemParams) -> dict[str, tuple[float, float]]:
    """The three closed-form links between ``b`` and ``(p, q, r)``; each
    entry is ``(left side, right side)``."""
    g = EllipseGeometry.from_params(params)
    b, a = params.b, params.a
    p, q, r = g.p, g.q, g.r
    root = 2.0 * p * q * math.sqrt(1.0 + p * p) * math.sqrt(1.0 + q * q)
    base = p * p + q * q + 2.0 * p * p * q * q
    return {
        "zero_height": (math.sqrt(b ** 4 - 1.0) / (b * math.sqrt(1.0 + 2.0 * a)), 2.0 * p * q / r),
        "b_squared": (b * b, (base + root) / (r * r)),
        "b_inverse_squared": (b ** -2, (base - root) / (r * r)),
    }


def schwarz_sample_points(params: ProblemParams, sample_count: int = 256,
                          guard: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Boundary points and exterior points on confocal ellipses, with
    points within ``guard`` of a pole or of the cut removed."""
    g = EllipseGeometry.from_params(params)
    s = 2.0 * np.pi * (np.arange(sample_count) + 0.25) / sample_count
    boundary = g.point(s)
    # confocal ellipses z = r cosh(u + i s) with u above the boundary value
    u0 = math.acosh(g.p / g.r)
    k = np.arange(sample_count)
    u = u0 + 0.05 + 1.5 * ((k * 0.6180339887498949) % 1.0)
    ext = g.r * np.cosh(u + 1j * s)
    b = params.b
    bad = np.array([1j * b, -1j * b, 1j / b, -1j / b])
    keep = np.min(np.abs(ext[:, None] - bad), axis=1) > guard
    keepb = np.min(np.abs(boundary[:, None] - bad), axis=1) > guard
    return boundary[keepb], ext[keep]


def verify_schwarz_identity(params: ProblemParams, sample_count: int = 256,
                            tol: float = 1e-10, identity_tol: float = 1e-12) -> VerificationReport:
    if not params.is_postcritical:
        raise RegimeError(f"the Schwarz identity needs the postcritical regime, got {params.regime}")
    g = EllipseGeometry.from_params(params)
    eq = LineEquilibrium(params)
    boundary, ext = schwarz_sample_points(params, sample_count)
    pts = np.concatenate([boundary, ext])
    S0 = classical_schwarz_S0(g, pts)
    S = spherical_schwarz_S(params, pts)
    lhs = S0 / (1.0 + pts * S0)
    resid = float(np.max(np.abs(lhs - S)))
    on_curve = float(max(np.max(np.abs(classical_schwarz_S0(g, boundary) - np.conj(boundary))),
                         np.max(np.abs(spherical_schwarz_S(params, boundary)
                                       - np.conj(boundary) / (1.0 + np.abs(boundary) ** 2)))))
    ids = parameter_identities(params)
    id_resid = {k: abs(l - r) / max(1.0, abs(l)) for k, (l, r) in ids.items()}
    worst_id = max(id_resid.values())
    focal = abs(g.r - eq.A)
    passed_ids = worst_id <= identity_tol and focal <= identity_tol
    return VerificationReport(
        check_name="schwarz",
        grid=f"{boundary.size} boundary + {ext.size} exterior points",
        constants={"p": g.p, "q": g.q, "r": g.r, "A": eq.A},
        max_equality_residual=max(resid, on_curve),
        # the parameter identities are exact; any failure fails the report
        worst_inequality_violation=0.0 if passed_ids else math.inf,
        tolerance=tol,
        details={"identity_residual": resid, "boundary_residual": on_curve,
                 "parameter_identities": id_resid, "focus_residual": focal},
    )
