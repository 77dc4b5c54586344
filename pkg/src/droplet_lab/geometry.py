"""Stereographic projection and spherical geometry on the unit sphere.

The projection is taken from the north pole ``N = (0, 0, 1)`` onto the
equatorial plane::

    phi(x1, x2, x3) = (x1 + i x2) / (1 - x3)

so the south pole goes to 0 and ``N`` goes to the point at infinity. The
point at infinity is an explicit state of :class:`PlanePoint`; the
vectorised helpers (:func:`stereo`, :func:`inverse_stereo`) work on finite
complex arrays only and report infinity through a boolean mask.

All areas are normalised so that the whole sphere has area 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

LOG2 = math.log(2.0)

#: Logarithmic potential of normalised Lebesgue measure on the sphere.
ELL0 = 0.5 - LOG2

NORTH = np.array([0.0, 0.0, 1.0])
SOUTH = np.array([0.0, 0.0, -1.0])

_RENORM_SLACK = 1e-6


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SpherePoint:
    """A point on the unit sphere.

    Inputs within ``1e-6`` of unit norm are renormalised; anything further
    off is rejected.
    """

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        n = math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2)
        if not math.isfinite(n) or abs(n - 1.0) >= _RENORM_SLACK:
            raise GeometryError(f"point ({self.x1}, {self.x2}, {self.x3}) is not on the unit sphere")
        if n != 1.0:
            object.__setattr__(self, "x1", self.x1 / n)
            object.__setattr__(self, "x2", self.x2 / n)
            object.__setattr__(self, "x3", self.x3 / n)

    @classmethod
    def from_array(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    @property
    def is_north_pole(self) -> bool:
        return self.x1 == 0.0 and self.x2 == 0.0 and self.x3 == 1.0


@dataclass(frozen=True)
class PlanePoint:
    """A point of the extended complex plane.

    Exactly one of ``value`` (finite) or ``infinite`` is meaningful; use
    :data:`INFINITY` or :meth:`finite` to build instances.
    """

    value: Optional[complex] = None
    infinite: bool = False

    def __post_init__(self):
        if self.infinite == (self.value is not None):
            raise GeometryError("PlanePoint needs exactly one of a finite value or the infinity flag")
        if self.value is not None:
            v = complex(self.value)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise GeometryError("use PlanePoint.INFINITY instead of a non-finite value")
            object.__setattr__(self, "value", v)

    @classmethod
    def finite(cls, z) -> "PlanePoint":
        return cls(value=complex(z))

    def __repr__(self):
        return "PlanePoint(inf)" if self.infinite else f"PlanePoint({self.value!r})"


INFINITY = PlanePoint(infinite=True)


def _as_plane(z) -> PlanePoint:
    if isinstance(z, PlanePoint):
        return z
    return PlanePoint.finite(z)


def project(p: SpherePoint) -> PlanePoint:
    """Stereographic image of ``p``; the north pole maps to infinity."""
    if p.is_north_pole:
        return INFINITY
    d = 1.0 - p.x3
    if d <= 0.0:
        return INFINITY
    return PlanePoint.finite(complex(p.x1, p.x2) / d)


def unproject(z) -> SpherePoint:
    """Inverse stereographic projection; infinity maps to the north pole."""
    z = _as_plane(z)
    if z.infinite:
        return SpherePoint(0.0, 0.0, 1.0)
    return SpherePoint.from_array(inverse_stereo(np.asarray(z.value)))


def stereo(xyz) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised projection of an ``(..., 3)`` array.

    Returns ``(z, at_infinity)``; entries of ``z`` flagged in ``at_infinity``
    are NaN.
    """
    xyz = np.asarray(xyz, dtype=float)
    d = 1.0 - xyz[..., 2]
    inf = d <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (xyz[..., 0] + 1j * xyz[..., 1]) / d
    z = np.where(inf, np.nan + 0j, z)
    return z, inf


def inverse_stereo(z) -> np.ndarray:
    """Vectorised inverse projection of finite complex ``z`` to ``(..., 3)``."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    den = 1.0 + r2
    return np.stack([2.0 * z.real / den, 2.0 * z.imag / den, (r2 - 1.0) / den], axis=-1)


def chordal(z, w) -> np.ndarray:
    """Chordal distance between finite plane points, vectorised."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 2.0 * np.abs(z - w) / np.sqrt((1.0 + np.abs(z) ** 2) * (1.0 + np.abs(w) ** 2))


def chordal_distance(z, w) -> float:
    """Distance in R^3 between the sphere preimages of two plane points."""
    z, w = _as_plane(z), _as_plane(w)
    if z.infinite and w.infinite:
        return 0.0
    if z.infinite or w.infinite:
        f = w.value if z.infinite else z.value
        return 2.0 / math.sqrt(1.0 + abs(f) ** 2)
    return float(chordal(z.value, w.value))


def geodesic_distance(x, y) -> np.ndarray:
    """Great-circle distance between unit vectors (broadcasting over ``...``)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.sum(x * y, axis=-1)
    s = np.linalg.norm(np.cross(x, y), axis=-1)
    return np.arctan2(s, c)


def tangent_frame(p) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``(e1, e2)`` spanning the tangent plane at ``p`` with
    ``e1 x e2 = p``."""
    p = np.asarray(p, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - np.dot(helper, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2


@dataclass(frozen=True)
class SphericalCap:
    """Open cap of geodesic radius ``geodesic_radius`` about ``center``."""

    center: SpherePoint
    geodesic_radius: float

    def __post_init__(self):
        if not (0.0 < self.geodesic_radius < math.pi):
            raise GeometryError("cap radius must lie in (0, pi)")

    @property
    def area(self) -> float:
        return cap_area(self)

    @property
    def steradians(self) -> float:
        return 4.0 * math.pi * cap_area(self)

    def contains(self, xyz) -> np.ndarray:
        return geodesic_distance(xyz, self.center.as_array()) < self.geodesic_radius

    def boundary(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Boundary circle and its s-derivative; counter-clockwise seen from
        outside the sphere above the centre, so the cap lies to the left."""
        s = np.asarray(s, dtype=float)[..., None]
        c = self.center.as_array()
        e1, e2 = tangent_frame(c)
        r = self.geodesic_radius
        y = math.cos(r) * c + math.sin(r) * (np.cos(s) * e1 + np.sin(s) * e2)
        dy = math.sin(r) * (-np.sin(s) * e1 + np.cos(s) * e2)
        return y, dy


def cap_area(cap: SphericalCap) -> float:
    return (1.0 - math.cos(cap.geodesic_radius)) / 2.0


def cap_radius_for_area(area: float) -> float:
    """Geodesic radius of a cap with normalised area ``area``."""
    if not (0.0 < area < 1.0):
        raise GeometryError("cap area must lie in (0, 1)")
    return math.acos(1.0 - 2.0 * area)


def pushforward_density_weight(z) -> float | np.ndarray:
    """Density of the projected normalised Lebesgue measure per unit planar
    area, ``1 / (pi (1 + |z|^2)^2)``."""
    if isinstance(z, PlanePoint):
        if z.infinite:
            raise GeometryError("the planar density is not defined at infinity")
        z = z.value
    return 1.0 / (np.pi * (1.0 + np.abs(z) ** 2) ** 2)


def transform_external_field(Q: Callable[[np.ndarray], float], z) -> float:
    """Planar field ``Q(phi^-1(z)) + log(1 + |z|^2) / 2`` for a field ``Q``
    given as a function of a unit vector."""
    z = _as_plane(z)
    if z.infinite:
        raise GeometryError("the planar field is only defined at finite points")
    q = Q(unproject(z).as_array())
    if q == math.inf:
        return math.inf
    return float(q) + 0.5 * math.log1p(abs(z.value) ** 2)


def potential_transform_constant(mu_total_mass: float, planar_log_moment: float) -> float:
    """Constant in ``U^mu(x) = U^{phi_* mu}(z) + m/2 log(1+|z|^2) + const``.

    ``planar_log_moment`` is ``int log(1 + |w|^2) d(phi_* mu)(w)``.
    """
    if mu_total_mass < 0:
        raise GeometryError("mass must be non-negative")
    return 0.5 * planar_log_moment - mu_total_mass * LOG2


def point_charge_field(centers, weights) -> Callable[[np.ndarray], np.ndarray]:
    """``Q(x) = sum_j w_j log(1/|x - c_j|)`` as a vectorised function of
    unit vectors ``(..., 3)``; ``+inf`` at a charge."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    weights = np.asarray(weights, dtype=float)

    def Q(xyz):
        xyz = np.asarray(xyz, dtype=float)
        d = np.linalg.norm(xyz[..., None, :] - centers, axis=-1)
        with np.errstate(divide="ignore"):
            return -np.sum(weights * np.log(d), axis=-1)

    return Q


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic near-uniform ``(n, 3)`` point set on the sphere."""
    k = np.arange(n) + 0.5
    x3 = 1.0 - 2.0 * k / n
    r = np.sqrt(np.clip(1.0 - x3 ** 2, 0.0, None))
    ang = np.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([r * np.cos(ang), r * np.sin(ang), x3], axis=-1)
