"""Measures on the sphere and their logarithmic potentials.

:class:`SphereRegion` carries normalised Lebesgue measure restricted to a
region ``G`` whose boundary is a finite union of smooth closed curves. Its
potential is reduced to a boundary integral. For a fixed evaluation point
``x`` the kernel ``log(1/|x - y|)`` depends only on the angle ``theta``
between ``x`` and ``y``; in polar coordinates about ``x`` the area element
is ``sin(theta) d theta d psi / (4 pi)``, so integrating out ``theta``
leaves::

    U(x) = 1/(4 pi) oint_{dG} K(theta) d psi + l0 * [ -x in G ]

with ``K(theta) = int_0^theta log(1/|x-y|) sin``, which in terms of
``u = (1 - x.y)/2`` is ``u (1 - 2 log 2 - log u)``. Replacing ``K`` by
``1 - cos(theta) = 2u`` gives the area, which doubles as an orientation
check. Subtracting ``2 l0 u`` from ``K`` and adding it back through the
area formula gives the form used here::

    U(x) = l0 * lambda(G) + 1/(4 pi) oint_{dG} (-u log u) d psi

whose integrand vanishes at ``y = -x``, so the winding of the boundary
around the antipode causes no trouble.

:class:`SphereLineMeasure` is the image of a :class:`LineMeasure` under the
inverse projection; it lives on the great circle through both poles and
``+-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .geometry import ELL0, SphericalCap, fibonacci_sphere, inverse_stereo
from .measures import LineMeasure

# a boundary curve maps s in [0, 2 pi) to points y (..., 3) and dy/ds
Curve = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def inverse_stereo_jacobian(z):
    """Derivatives of the inverse projection with respect to Re z and Im z."""
    z = np.asarray(z, dtype=complex)
    X, Y = z.real, z.imag
    r2 = X * X + Y * Y
    den = (1.0 + r2) ** 2
    dX = np.stack([2.0 * (1.0 - X * X + Y * Y), -4.0 * X * Y, 4.0 * X], axis=-1) / den[..., None]
    dY = np.stack([-4.0 * X * Y, 2.0 * (1.0 + X * X - Y * Y), 4.0 * Y], axis=-1) / den[..., None]
    return dX, dY


def planar_curve(z_of_s: Callable, dz_of_s: Callable) -> Curve:
    """Lift a plane curve ``s -> z(s)`` to the sphere."""

    def curve(s):
        z = z_of_s(s)
        dz = np.asarray(dz_of_s(s), dtype=complex)
        dX, dY = inverse_stereo_jacobian(z)
        return inverse_stereo(z), dX * dz.real[..., None] + dY * dz.imag[..., None]

    return curve


def reversed_curve(curve: Curve) -> Curve:
    def rev(s):
        y, dy = curve(2.0 * np.pi - np.asarray(s))
        return y, -dy

    return rev


def _kernel_ulogu(c):
    u = np.clip(0.5 * (1.0 - c), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = -u * np.log(u)
    return np.where(u > 0, k, 0.0)


def _kernel_area(c):
    return 1.0 - c


class SphereRegion:
    """Normalised Lebesgue measure on a closed region ``G`` of the sphere.

    ``curves`` must trace ``dG`` with ``G`` on the left when seen from
    outside the sphere. ``contains`` is a vectorised membership test on
    ``(..., 3)`` arrays.
    """

    kind = "sphere_area"

    def __init__(self, curves: Sequence[Curve], contains: Callable, name: str = "G",
                 area: float | None = None):
        self.curves = list(curves)
        self._contains = contains
        self.name = name
        self._area = area

    def contains(self, xyz) -> np.ndarray:
        return self._contains(np.asarray(xyz, dtype=float))

    _TRAPEZOID_LEVELS = (256, 512, 1024, 2048, 4096)

    def _integrand(self, x, kernel, s):
        """Boundary integrand at parameters ``s`` for points ``x``; shape
        ``(len(x), len(s))``."""
        tot = np.zeros((x.shape[0], np.size(s)))
        for curve in self.curves:
            y, dy = curve(np.atleast_1d(s))
            c = x @ y.T
            num = x @ np.cross(y, dy).T
            den = 1.0 - c * c
            ok = den > 1e-300
            val = np.zeros_like(c)
            val[ok] = kernel(c[ok]) * num[ok] / den[ok]
            tot += val
        return tot

    def _boundary_integral(self, x, kernel, tol=1e-13):
        """``1/(4 pi) oint kernel d psi``. The integrand is smooth and
        periodic, so the trapezoid rule converges geometrically; points
        where successive levels still disagree (those close to the
        boundary) fall back to adaptive quadrature."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        todo = np.arange(x.shape[0])
        prev = None
        for n in self._TRAPEZOID_LEVELS:
            s = 2.0 * np.pi * np.arange(n) / n
            val = self._integrand(x[todo], kernel, s).sum(axis=1) * (2.0 * np.pi / n)
            if prev is not None:
                done = np.abs(val - prev) <= tol
                out[todo[done]] = val[done]
                todo, val = todo[~done], val[~done]
            prev = val
            if todo.size == 0:
                break
        if todo.size:
            xs = x[todo]
            val, _ = quad_vec(lambda s: self._integrand(xs, kernel, s)[:, 0], 0.0, 2.0 * np.pi,
                              epsabs=tol, epsrel=1e-13, norm="max", limit=20000)
            out[todo] = val
        return out / (4.0 * np.pi)

    def potential(self, x, batch: int = 64):
        """``int log(1/|x - y|) d lambda_G(y)`` for ``x`` of shape ``(..., 3)``."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        out = np.empty(flat.shape[0])
        for i in range(0, flat.shape[0], batch):
            xb = flat[i:i + batch]
            out[i:i + batch] = self._boundary_integral(xb, _kernel_ulogu) + ELL0 * self.total_mass
        return out.reshape(x.shape[:-1])

    def area_seen_from(self, x):
        """Area of ``G`` computed with ``x`` as the polar axis."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._boundary_integral(x, _kernel_area) + self.contains(-x).astype(float)

    @property
    def total_mass(self) -> float:
        """Area of ``G``, seen from the candidate axis whose antipode is
        furthest from the boundary (where the trapezoid rule converges
        fastest)."""
        if self._area is None:
            axes = fibonacci_sphere(24)
            s = 2.0 * np.pi * np.arange(512) / 512
            ys = np.concatenate([curve(s)[0] for curve in self.curves])
            clearance = np.min(np.linalg.norm(ys[None, :, :] + axes[:, None, :], axis=-1), axis=1)
            best = axes[np.argsort(clearance)[-2:]]
            self._area = float(np.mean(self.area_seen_from(best)))
        return self._area


def cap_curves(caps: Sequence[SphericalCap]) -> list[Curve]:
    """Boundaries of the complement of a union of disjoint caps."""
    return [reversed_curve(cap.boundary) for cap in caps]


class SphereLineMeasure:
    """Pushforward of a :class:`LineMeasure` to the great circle
    ``{x2 = 0}`` scaled by ``scale``."""

    kind = "sphere_line"

    def __init__(self, line: LineMeasure, scale: float = 1.0):
        self.line = line
        self.scale = float(scale)

    @property
    def total_mass(self) -> float:
        return self.scale * self.line.total_mass

    def sample_support(self, n: int) -> np.ndarray:
        th = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n + 2)[1:-1]
        return inverse_stereo(self.line._s(th) + 0j)

    def potential(self, x):
        """``int log(1/|x - y|) d sigma(y)`` by graded quadrature along the
        circle toward the point nearest to ``x``."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        out = np.empty(flat.shape[0])
        for k, xk in enumerate(flat):
            beta = math.atan2(xk[0], -xk[2])
            s_near = math.tan(0.5 * beta) if abs(beta) < math.pi else math.inf
            if self.line.bounded:
                A = self.line.A
                if math.isinf(s_near) or abs(s_near) >= A:
                    c = math.copysign(0.5 * math.pi, s_near if not math.isinf(s_near) else 1.0)
                else:
                    c = math.asin(s_near / A)
                # convert the chord distance into the angle variable of s = A sin
                s_c = A * math.sin(c)
                d = abs(xk[1]) * (1.0 + s_c * s_c) / (2.0 * A * max(math.cos(c), 1e-300))
            else:
                c = 0.5 * beta
                d = 0.5 * abs(xk[1])

            def ker(s, th, xk=xk):
                y = inverse_stereo(s + 0j)
                dist = np.linalg.norm(y - xk, axis=-1)
                with np.errstate(divide="ignore"):
                    return -np.log(dist)

            out[k] = self.line.kernel_integral(ker, c, 0.5 * d)
        return self.scale * out.reshape(x.shape[:-1])
