"""Equilibrium measure on the real line in the weakly admissible field

    V(x) = (1+a)/2 log(x^2 + b^-2) - a/2 log(x^2 + b^2).

Below (and at) the critical charge ``a_cr = 1/(b^2 - 1)`` the measure lives on
the whole line and is a signed combination of two Cauchy densities. Above it
the support is ``[-A, A]`` and the density has square-root endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
POSTCRITICAL = "postcritical"

_CRIT_TOL = 1e-12


class RegimeError(ValueError):
    """Raised when an operation is asked for in the wrong regime."""


class PoleError(ValueError):
    """Raised when a rational function is evaluated at one of its poles."""


@dataclass(frozen=True)
class ProblemParams:
    """Charge location ``+-ib`` (``b >= 1``) and charge strength ``a > 0``."""

    b: float
    a: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b >= 1.0):
            raise ValueError(f"b must be >= 1, got {self.b}")
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"a must be > 0, got {self.a}")

    @classmethod
    def from_t(cls, b: float, t: float) -> "ProblemParams":
        """Build from the time parameter ``t = 1/(1+2a)``."""
        if not (0.0 < t < 1.0):
            raise ValueError(f"t must lie in (0, 1), got {t}")
        return cls(b, (1.0 - t) / (2.0 * t))

    @property
    def a_cr(self) -> float:
        if self.b == 1.0:
            return math.inf
        return 1.0 / (self.b ** 2 - 1.0)

    @property
    def t(self) -> float:
        return 1.0 / (1.0 + 2.0 * self.a)

    @property
    def t_cr(self) -> float:
        return (self.b ** 2 - 1.0) / (self.b ** 2 + 1.0)

    @property
    def regime(self) -> str:
        # b = 1 has a_cr = inf: the charges are antipodal and never merge
        a_cr = self.a_cr
        if math.isinf(a_cr):
            return SUBCRITICAL
        if abs(self.a - a_cr) <= _CRIT_TOL:
            return CRITICAL
        return SUBCRITICAL if self.a < a_cr else POSTCRITICAL

    @property
    def is_postcritical(self) -> bool:
        return self.regime == POSTCRITICAL

    @property
    def charge_points(self) -> tuple[complex, complex]:
        return 1j * self.b, -1j * self.b


def external_field_V(params: ProblemParams, x):
    b, a = params.b, params.a
    x2 = np.asarray(x, dtype=float) ** 2
    return 0.5 * (1.0 + a) * np.log(x2 + b ** -2) - 0.5 * a * np.log(x2 + b ** 2)


def external_field_V_t(b: float, t: float, x):
    """The same field written in terms of ``t = 1/(1+2a)``."""
    x2 = np.asarray(x, dtype=float) ** 2
    return ((1.0 + t) * np.log(x2 + b ** -2) - (1.0 - t) * np.log(x2 + b ** 2)) / (4.0 * t)


def _check_poles(z, b: float, what: str):
    z = np.asarray(z, dtype=complex)
    z2 = z * z
    scale = max(b * b, 1.0)
    bad = (np.abs(z2 + b ** 2) <= 1e-14 * scale) | (np.abs(z2 + b ** -2) <= 1e-14 * scale)
    if np.any(bad):
        raise PoleError(f"{what} has poles at +-ib and +-i/b")
    return z, z2


def field_derivative(params: ProblemParams, z):
    """``V'(z)`` continued to a rational function on the plane."""
    b, a = params.b, params.a
    z, z2 = _check_poles(z, b, "V'")
    return (1.0 + a) * z / (z2 + b ** -2) - a * z / (z2 + b ** 2)


def compute_A_C(params: ProblemParams) -> tuple[float, float]:
    """Endpoint ``A`` of the support and the amplitude ``C`` (postcritical)."""
    if not params.is_postcritical:
        raise RegimeError(f"A and C exist only above a_cr; regime is {params.regime}")
    b, a = params.b, params.a
    plus = b * b * a + a + 1.0
    minus = b * b * a - a - 1.0
    A = b * math.sqrt(1.0 + 2.0 * a) / (math.sqrt(plus) * math.sqrt(minus))
    C = (b ** 4 - 1.0) * plus * minus / b ** 4
    return A, C


def sqrt_cut(z, c: float):
    """Branch of ``(z^2 - c^2)^(1/2)`` cut along ``[-c, c]``, ``~ z`` at infinity."""
    z = np.asarray(z, dtype=complex)
    return np.sqrt(z - c) * np.sqrt(z + c)


def balayage_point_to_line(c: float, x):
    """Density of the sweep of a unit mass at ``ic`` onto the real line."""
    if not c > 0:
        raise ValueError("c must be positive")
    x = np.asarray(x, dtype=float)
    return c / (np.pi * (x * x + c * c))


def balayage_point_to_interval(c: float, A: float, x):
    """Density of the sweep of a unit mass at ``ic`` onto ``[-A, A]``."""
    if not c > 0 or not A > 0:
        raise ValueError("c and A must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= A):
        raise ValueError("x must lie strictly inside (-A, A)")
    return c * math.sqrt(A * A + c * c) / (np.pi * (x * x + c * c) * np.sqrt(A * A - x * x))


@dataclass(frozen=True)
class LineEquilibrium:
    """The equilibrium measure ``mu_V`` for given parameters."""

    params: ProblemParams

    @cached_property
    def _AC(self):
        if self.params.is_postcritical:
            return compute_A_C(self.params)
        return None, None

    @property
    def A(self) -> float | None:
        return self._AC[0]

    @property
    def C(self) -> float | None:
        return self._AC[1]

    @property
    def bounded(self) -> bool:
        return self.params.is_postcritical

    @property
    def support(self) -> tuple[float, float]:
        if self.bounded:
            return -self.A, self.A
        return -math.inf, math.inf

    def density(self, x):
        b, a = self.params.b, self.params.a
        x = np.asarray(x, dtype=float)
        x2 = x * x
        den = (x2 + b ** 2) * (x2 + b ** -2)
        if not self.bounded:
            num = (1.0 + a - b * b * a) * x2 + b * b + b * b * a - a
            return num / (np.pi * b * den)
        A, C = self.A, self.C
        inside = np.clip(A * A - x2, 0.0, None)
        return math.sqrt(C) * np.sqrt(inside) / (np.pi * den)

    def density_critical_form(self, x):
        """Closed form valid at ``a = a_cr``."""
        b = self.params.b
        x2 = np.asarray(x, dtype=float) ** 2
        return (b * b + 1.0) / (np.pi * b * (x2 + b ** 2) * (x2 + b ** -2))

    def R(self, z):
        """``C (z^2 - A^2) / ((z^2+b^2)^2 (z^2+b^-2)^2)``; postcritical only."""
        if not self.bounded:
            raise RegimeError("R(z) in closed form is only available above a_cr")
        b = self.params.b
        z, z2 = _check_poles(z, b, "R")
        return self.C * (z2 - self.A ** 2) / ((z2 + b ** 2) ** 2 * (z2 + b ** -2) ** 2)

    def sqrt_R(self, z):
        """Branch of ``R(z)^(1/2)`` making ``V' - R^(1/2)`` decay like ``1/z``."""
        b = self.params.b
        z, z2 = _check_poles(z, b, "R")
        return math.sqrt(self.C) * sqrt_cut(z, self.A) / ((z2 + b ** 2) * (z2 + b ** -2))

    def stieltjes(self, z):
        """``F(z) = int dmu_V(s) / (z - s)`` off the support."""
        z = np.asarray(z, dtype=complex)
        b, a = self.params.b, self.params.a
        if self.bounded:
            on_cut = (z.imag == 0) & (np.abs(z.real) <= self.A)
            if np.any(on_cut):
                raise ValueError("z lies on the support [-A, A]")
            return self._stieltjes_bounded(z)
        if np.any(z.imag == 0):
            raise ValueError("the support is the whole real line")
        sg = np.sign(z.imag)
        # Cauchy transform of c/(pi(x^2+c^2)) is 1/(z + i c sgn Im z)
        return (1.0 + a) / (z + 1j * sg / b) - a / (z + 1j * sg * b)

    def _stieltjes_bounded(self, z):
        b = self.params.b
        shape = np.shape(z)
        z = np.atleast_1d(z)
        out = np.empty(z.shape, dtype=complex)
        poles = np.array([1j * b, -1j * b, 1j / b, -1j / b])
        d = np.min(np.abs(z[..., None] - poles), axis=-1)
        near = d < 1e-6 * b
        far = ~near
        out[far] = field_derivative(self.params, z[far]) - self.sqrt_R(z[far])
        if np.any(near):
            # the poles of V' and R^(1/2) cancel; use the circle mean of F
            delta = 1e-2 / b
            ring = delta * np.exp(2j * np.pi * np.arange(32) / 32)
            zz = z[near][..., None] + ring
            out[near] = np.mean(field_derivative(self.params, zz) - self.sqrt_R(zz), axis=-1)
        return out.reshape(shape)

    def point_balayage_form(self, x):
        """``(1+a) Bal(delta_{i/b}) - a Bal(delta_{ib})`` on the line."""
        b, a = self.params.b, self.params.a
        return (1.0 + a) * balayage_point_to_line(1.0 / b, x) - a * balayage_point_to_line(b, x)

    def measure(self):
        from .measures import LineMeasure

        b = self.params.b
        poles = (1j * b, -1j * b, 1j / b, -1j / b)
        if self.bounded:
            return LineMeasure(self.density, support=(-self.A, self.A), endpoint="sqrt", poles=poles)
        return LineMeasure(self.density, support=None, poles=poles)


def density_muV(eq: LineEquilibrium, x):
    return eq.density(x)


def R_function(eq: LineEquilibrium, z):
    return eq.R(z)


def stieltjes_transform(eq: LineEquilibrium, z):
    return eq.stieltjes(z)
