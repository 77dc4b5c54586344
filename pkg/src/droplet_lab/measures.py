"""Planar measures and their logarithmic potentials.

Four kinds are used throughout the package:

* :class:`LineMeasure` -- a density on an interval ``[-A, A]`` or the whole
  real line,
* :class:`EllipseMeasure` -- a density with respect to area on a filled
  ellipse,
* :class:`CurveMeasure` -- a density on an ellipse boundary,
* :class:`AtomMeasure` -- finitely many point masses.

Each exposes ``total_mass``, ``potential(z)`` (``int log 1/|z-s| dmu(s)``)
and ``cauchy(z)`` (``int dmu(s)/(z-s)``). The quadratures are built so that
the logarithmic singularity of the kernel is integrated accurately for
evaluation points on or near the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int, lo: float = 0.0, hi: float = 1.0):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL_CACHE[n]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def graded_rule(lo: float, hi: float, center: float, dist: float, order: int = 16,
                ratio: float = 2.0, coarse: int = 8, grade_ends: bool = False,
                extra: Sequence[tuple[float, float]] = ()):
    """Composite Gauss-Legendre rule on ``[lo, hi]`` with panels shrinking
    geometrically toward ``center``.

    ``dist`` is the distance of the nearest singularity from the real
    interval (0 for a singularity on it); the smallest panel is about that
    size. ``grade_ends`` adds geometric refinement toward both endpoints,
    for integrands with logarithmic endpoint singularities. ``extra`` lists
    further ``(center, dist)`` pairs to grade toward, such as poles of the
    integrand near the interval.
    """
    span = hi - lo
    hmax = span / coarse
    breaks = []
    for c, d in ((center, dist), *extra):
        c = min(max(c, lo), hi)
        h0 = max(0.5 * d, 1e-15 * max(span, 1.0))
        breaks.append(c)
        h, x = h0, c
        while x < hi:
            x = min(x + min(h, hmax), hi)
            breaks.append(x)
            h *= ratio
        h, x = h0, c
        while x > lo:
            x = max(x - min(h, hmax), lo)
            breaks.append(x)
            h *= ratio
    if grade_ends:
        k = np.arange(1, 48)
        tail = list(hmax * 0.5 ** k)
        breaks += [lo + h for h in tail] + [hi - h for h in tail]
    breaks = np.unique(np.clip(breaks, lo, hi))
    g, w = gauss_legendre(order, 0.0, 1.0)
    a, b = breaks[:-1], breaks[1:]
    nodes = (a[:, None] + (b - a)[:, None] * g).ravel()
    weights = ((b - a)[:, None] * w).ravel()
    return nodes, weights


@dataclass
class AtomMeasure:
    """Finite sum of point masses in the plane."""

    locations: Sequence[complex]
    weights: Sequence[float]
    kind: str = field(default="atoms", init=False)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def potential(self, z):
        z = np.asarray(z, dtype=complex)
        loc = np.asarray(self.locations, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        d = np.abs(z[..., None] - loc)
        with np.errstate(divide="ignore"):
            out = -np.sum(w * np.log(d), axis=-1)
        # an atom of positive mass gives +inf; keep that visible
        out = np.where(np.any((d == 0) & (w > 0), axis=-1), np.inf, out)
        return out

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        loc = np.asarray(self.locations, dtype=complex)
        return np.sum(np.asarray(self.weights) / (z[..., None] - loc), axis=-1)


class LineMeasure:
    """Density on the real line.

    ``support=(lo, hi)`` with ``lo = -hi`` selects the substitution
    ``s = A sin(theta)``, which removes square-root (``endpoint="sqrt"``) or
    inverse square-root (``endpoint="invsqrt"``) edge behaviour.
    ``support=None`` means the whole line and uses ``s = tan(theta)``.
    ``poles`` lists complex singularities of the density off the line; the
    singular rules refine toward them as well.
    """

    kind = "line_density"

    def __init__(self, density: Callable, support=None, endpoint: str | None = "sqrt",
                 mass: float | None = None, poles: Sequence[complex] = ()):
        self.density = density
        self.support = support
        self.endpoint = endpoint
        if support is not None:
            lo, hi = support
            if not math.isclose(lo, -hi):
                raise ValueError("bounded supports must be symmetric [-A, A]")
            self.A = hi
        self._mass = mass
        with np.errstate(all="ignore"):
            c, d = self._theta_of(np.asarray(poles, dtype=complex))
        self._features = tuple((ci, di) for ci, di in zip(c.tolist(), d.tolist())
                               if math.isfinite(ci) and math.isfinite(di))

    # -- parametrisation -------------------------------------------------
    @property
    def bounded(self) -> bool:
        return self.support is not None

    def _s(self, th):
        return self.A * np.sin(th) if self.bounded else np.tan(th)

    def _ds(self, th):
        return self.A * np.cos(th) if self.bounded else 1.0 / np.cos(th) ** 2

    def _theta_of(self, z):
        z = np.asarray(z, dtype=complex)
        th = np.arcsin(z / self.A) if self.bounded else np.arctan(z)
        lim = 0.5 * np.pi
        c = np.clip(th.real, -lim, lim)
        d = np.abs(th.imag) + np.abs(th.real - c)
        return c, d

    def _weights(self, th, w):
        return self.density(self._s(th)) * self._ds(th) * w

    def smooth_rule(self, n: int = 400):
        th, w = gauss_legendre(n, -0.5 * np.pi, 0.5 * np.pi)
        if not self.bounded:
            # keep away from the exact endpoints where tan overflows
            pass
        return self._s(th), self._weights(th, w)

    @property
    def total_mass(self) -> float:
        if self._mass is None:
            _, w = self.smooth_rule(600)
            self._mass = float(np.sum(w))
        return self._mass

    def integrate(self, f, n: int = 600):
        s, w = self.smooth_rule(n)
        return np.sum(f(s) * w, axis=-1)

    def graded(self, center: float, dist: float):
        th, w = graded_rule(-0.5 * np.pi, 0.5 * np.pi, center, dist, grade_ends=not self.bounded,
                            extra=self._features)
        return th, self._s(th), self._weights(th, w)

    # -- potentials --------------------------------------------------------
    def potential(self, z):
        """``int log(1/|z - s|) dmu(s)`` for real or complex ``z``."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape)
        c, d = self._theta_of(flat)
        for k, zk in enumerate(flat):
            th, s, w = self.graded(c[k], d[k])
            if self.bounded:
                with np.errstate(divide="ignore"):
                    ker = -np.log(np.abs(zk - s))
            else:
                # log|z - tan th| = log|z cos th - sin th| - log cos th
                with np.errstate(divide="ignore"):
                    ker = -np.log(np.abs(zk * np.cos(th) - np.sin(th))) + np.log(np.cos(th))
            ker = np.where(np.isfinite(ker), ker, 0.0)
            out[k] = np.sum(ker * w)
        return out.reshape(z.shape)

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        c, d = self._theta_of(flat)
        for k, zk in enumerate(flat):
            _, s, w = self.graded(c[k], d[k])
            out[k] = np.sum(w / (zk - s))
        return out.reshape(z.shape)

    def kernel_integral(self, kernel: Callable, center: float, dist: float):
        """``int kernel(s) dmu(s)`` with panels graded toward the parameter
        value ``center`` (in the internal angle variable)."""
        th, s, w = self.graded(center, dist)
        k = kernel(s, th)
        k = np.where(np.isfinite(k), k, 0.0)
        return np.sum(k * w)


# ---------------------------------------------------------------------------
# Filled ellipse


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


class EllipseMeasure:
    """Area density ``weight(s)`` on ``{x^2/p^2 + y^2/q^2 <= 1}``."""

    kind = "planar_density"

    _LEVELS = ((96, 24), (192, 32), (384, 48), (768, 64), (1536, 96), (3072, 128))

    def __init__(self, p: float, q: float, weight: Callable):
        self.p = float(p)
        self.q = float(q)
        self.weight = weight
        self._mass = None

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real / self.p) ** 2 + (z.imag / self.q) ** 2 <= 1.0

    def tensor_rule(self, n_rho: int = 64, n_theta: int = 256):
        """Smooth rule in elliptic polar coordinates ``s = r (p cos t + i q sin t)``."""
        r, wr = gauss_legendre(n_rho, 0.0, 1.0)
        t = 2.0 * np.pi * np.arange(n_theta) / n_theta
        s = r[:, None] * (self.p * np.cos(t) + 1j * self.q * np.sin(t))
        w = (self.p * self.q * r * wr)[:, None] * (2.0 * np.pi / n_theta) * np.ones_like(t)
        return s.ravel(), w.ravel()

    def integrate(self, f, n_rho: int = 64, n_theta: int = 256):
        s, w = self.tensor_rule(n_rho, n_theta)
        return np.sum(f(s) * self.weight(s) * w, axis=-1)

    @property
    def total_mass(self) -> float:
        if self._mass is None:
            self._mass = float(self.integrate(lambda s: np.ones(s.shape)))
        return self._mass

    # -- singular integrals, polar about the evaluation point ----------------
    def _ray(self, z, th):
        X, Y = z.real[..., None], z.imag[..., None]
        c, s = np.cos(th), np.sin(th)
        p2, q2 = self.p ** 2, self.q ** 2
        alpha = c * c / p2 + s * s / q2
        beta = X * c / p2 + Y * s / q2
        gamma = X * X / p2 + Y * Y / q2 - 1.0
        return alpha, beta, gamma

    def _interior(self, z, kernel, n_th, n_r):
        th = 2.0 * np.pi * np.arange(n_th) / n_th
        alpha, beta, gamma = self._ray(z, th)
        rho_e = (-beta + np.sqrt(np.maximum(beta * beta - alpha * gamma, 0.0))) / alpha
        v, wv = gauss_legendre(n_r, 0.0, 1.0)
        u = v ** 3
        du = 3.0 * v ** 2 * wv
        rho = rho_e[..., None] * u
        e = np.exp(1j * th)[None, :, None]
        s = z[:, None, None] + rho * e
        val = kernel(rho, e) * self.weight(s) * rho * rho_e[..., None] * du
        return np.sum(val, axis=(1, 2)) * (2.0 * np.pi / n_th)

    def _exterior(self, z, kernel, n_th, n_r):
        p2, q2 = self.p ** 2, self.q ** 2
        X, Y = z.real, z.imag
        M = np.empty(z.shape + (2, 2))
        M[..., 0, 0] = (1.0 - Y * Y / q2) / p2
        M[..., 1, 1] = (1.0 - X * X / p2) / q2
        M[..., 0, 1] = M[..., 1, 0] = X * Y / (p2 * q2)
        lam, vec = np.linalg.eigh(M)
        l1, l2 = np.minimum(lam[..., 0], 0.0), np.maximum(lam[..., 1], 0.0)
        e1, e2 = vec[..., :, 0], vec[..., :, 1]
        dirs = []
        for sgn in (1.0, -1.0):
            d = np.sqrt(l2)[..., None] * e1 + sgn * np.sqrt(-l1)[..., None] * e2
            beta = d[..., 0] * X / p2 + d[..., 1] * Y / q2
            d = np.where((beta > 0)[..., None], -d, d)
            dirs.append(np.arctan2(d[..., 1], d[..., 0]))
        t1, t2 = dirs
        delta = _wrap(t2 - t1)
        half = 0.5 * np.abs(delta)
        mid = t1 + 0.5 * delta
        phi, wphi = gauss_legendre(n_th, 0.0, np.pi)
        th = mid[:, None] - half[:, None] * np.cos(phi)
        dth = half[:, None] * np.sin(phi) * wphi
        X2, Y2 = X[:, None], Y[:, None]
        c, s_ = np.cos(th), np.sin(th)
        alpha = c * c / p2 + s_ * s_ / q2
        beta = X2 * c / p2 + Y2 * s_ / q2
        gamma = (X * X / p2 + Y * Y / q2 - 1.0)[:, None]
        disc = np.sqrt(np.maximum(beta * beta - alpha * gamma, 0.0))
        r1 = (-beta - disc) / alpha
        r2 = (-beta + disc) / alpha
        v, wv = gauss_legendre(n_r, 0.0, 1.0)
        u = v ** 3
        du = 3.0 * v ** 2 * wv
        L = (r2 - r1)[..., None]
        rho = r1[..., None] + L * u
        e = np.exp(1j * th)[..., None]
        pts = z[:, None, None] + rho * e
        val = kernel(rho, e) * self.weight(pts) * rho * L * du
        return np.sum(np.sum(val, axis=2) * dth, axis=1)

    def _singular(self, z, kernel, tol, dtype):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        flat = z.ravel()
        out = np.zeros(flat.shape, dtype=dtype)
        err = np.full(flat.shape, np.inf)
        inside = ((flat.real / self.p) ** 2 + (flat.imag / self.q) ** 2) <= 1.0
        for idx, fn in ((np.nonzero(inside)[0], self._interior), (np.nonzero(~inside)[0], self._exterior)):
            todo = idx
            prev = None
            for n_th, n_r in self._LEVELS:
                if todo.size == 0:
                    break
                vals = np.concatenate([fn(flat[chunk], kernel, n_th, n_r)
                                       for chunk in np.array_split(todo, max(1, todo.size * n_th * n_r // 2_000_000 + 1))])
                if prev is not None:
                    e = np.abs(vals - prev)
                    out[todo] = vals
                    err[todo] = e
                    keep = e > tol
                    prev = vals[keep]
                    todo = todo[keep]
                else:
                    out[todo] = vals
                    prev = vals
        self.last_error = err.reshape(z.shape)
        return out.reshape(z.shape)

    def potential(self, z, tol: float = 1e-11):
        """Logarithmic potential; ``self.last_error`` holds the per-point
        difference between the last two refinement levels."""
        shape = np.shape(z)
        out = self._singular(z, lambda rho, e: -np.log(rho), tol, float)
        return out.reshape(shape)

    def cauchy(self, z, tol: float = 1e-11):
        shape = np.shape(z)
        # 1/(z - s) = -e^{-i theta}/rho; the rho from dA cancels it
        out = self._singular(z, lambda rho, e: -np.conj(e) / rho, tol, complex)
        return out.reshape(shape)


# ---------------------------------------------------------------------------
# Measure on an ellipse boundary


class CurveMeasure:
    """Measure ``psi(tau) d tau`` on ``p cos tau + i q sin tau``.

    ``psi`` is given by its values at ``n`` equispaced nodes and is
    interpolated trigonometrically.
    """

    kind = "boundary_density"

    def __init__(self, p: float, q: float, psi_nodes: np.ndarray):
        self.p = float(p)
        self.q = float(q)
        self.psi = np.asarray(psi_nodes, dtype=float)
        self.n = self.psi.size

    def curve(self, tau):
        return self.p * np.cos(tau) + 1j * self.q * np.sin(tau)

    def speed(self, tau):
        return np.hypot(self.p * np.sin(tau), self.q * np.cos(tau))

    def upsample(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and trigonometric interpolant of ``psi`` on ``m`` points."""
        if m == self.n:
            return 2.0 * np.pi * np.arange(m) / m, self.psi
        c = np.fft.rfft(self.psi)
        if self.n % 2 == 0:
            c[-1] *= 0.5
        k = m // 2 + 1
        cc = np.zeros(k, dtype=complex)
        cc[: c.size] = c
        vals = np.fft.irfft(cc, m) * (m / self.n)
        return 2.0 * np.pi * np.arange(m) / m, vals

    def density(self, tau):
        """Interpolated ``psi`` at arbitrary parameters."""
        tau = np.asarray(tau, dtype=float)
        c = np.fft.rfft(self.psi) / self.n
        k = np.arange(c.size)
        fac = np.where((k == 0) | ((self.n % 2 == 0) & (k == c.size - 1)), 1.0, 2.0)
        return np.real(np.sum(fac * c * np.exp(1j * k * tau[..., None]), axis=-1))

    def arclength_density(self, tau):
        return self.density(tau) / self.speed(tau)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.psi) * 2.0 * np.pi / self.n)

    def potential(self, z, m: int = 4096):
        z = np.asarray(z, dtype=complex)
        tau, psi = self.upsample(m)
        s = self.curve(tau)
        w = psi * 2.0 * np.pi / m
        out = np.empty(z.shape)
        flat, o = z.ravel(), out.ravel()
        for i in range(0, flat.size, 256):
            d = np.abs(flat[i:i + 256, None] - s)
            o[i:i + 256] = -np.log(d) @ w
        return out
