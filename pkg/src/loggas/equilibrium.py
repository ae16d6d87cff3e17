"""Closed-form quartic equilibrium measures and their transforms.

Two families, both supported on a symmetric interval with a square-root edge:

* confining, for V = x^4/4 + c x^2/2, c > -2:
      density(x) = (1/pi) (x^2/2 + b) sqrt(a^2 - x^2)   on [-a, a],
      a^2 = (sqrt(4c^2+48) - 2c)/3,  b = (c + sqrt(c^2/4 + 3))/3.
* nonconfining, for V = g x^4/4 + x^2/2, g > -1/12:
      density(x) = (1/2pi) (1 + 2ga^2 + g x^2) sqrt(4a^2 - x^2)   on [-2a, 2a],
      with 3g a^4 + a^2 = 1 (the root continuous at g = 0, where a = 1 and the
      density is the semicircle law).

CDF values use Gauss-Legendre quadrature after x = A sin(theta), which turns
the square-root edge factor into a smooth trigonometric polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .measures import QuantileFunction
from .potentials import Potential, quartic_confining, quartic_nonconfining

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(192)

CONFINING = "confining"
NONCONFINING = "nonconfining"


@dataclass(frozen=True)
class EquilibriumDensity:
    """Quartic equilibrium measure with pointwise density on [-A, A]."""

    family: str
    param: float  # c (confining) or g (nonconfining)
    a: float
    b: float  # 0.0 for the nonconfining family
    support_radius: float

    def density(self, x):
        xx = np.asarray(x, dtype=float)
        A = self.support_radius
        inside = np.abs(xx) <= A
        edge = np.sqrt(np.clip(A * A - xx * xx, 0.0, None))
        if self.family == CONFINING:
            vals = (0.5 * xx * xx + self.b) * edge / np.pi
        else:
            g = self.param
            a2 = self.a * self.a
            vals = (1.0 + 2.0 * g * a2 + g * xx * xx) * edge / (2.0 * np.pi)
        vals = np.where(inside, vals, 0.0)
        return vals if np.ndim(x) else float(vals)

    def _theta_integral(self, theta_lo: float, theta_hi: float) -> float:
        # integral of density over [A sin(theta_lo), A sin(theta_hi)]
        A = self.support_radius
        half = 0.5 * (theta_hi - theta_lo)
        mid = 0.5 * (theta_hi + theta_lo)
        theta = mid + half * _GL_NODES
        x = A * np.sin(theta)
        w = A * np.cos(theta)
        return float(np.sum(_GL_WEIGHTS * self.density(x) * w) * half)

    def cdf(self, x: float) -> float:
        A = self.support_radius
        if x <= -A:
            return 0.0
        if x >= A:
            return 1.0
        theta = math.asin(x / A)
        return self._theta_integral(-0.5 * math.pi, theta)

    def total_mass(self) -> float:
        return self._theta_integral(-0.5 * math.pi, 0.5 * math.pi)

    def quantile(self, u: float) -> float:
        """Unique x with CDF(x) = u; |CDF(result) - u| <= 1e-10."""
        if not 0.0 < u < 1.0:
            raise ValueError("u must lie in (0,1)")
        A = self.support_radius
        return float(brentq(lambda t: self.cdf(t) - u, -A, A, xtol=1e-14, rtol=8.9e-16))

    def sample(self, n: int) -> np.ndarray:
        """Midpoint-quantile sample of size n, exactly antisymmetric by mirroring."""
        if n < 1:
            raise ValueError("n must be >= 1")
        us = (np.arange(1, n + 1) - 0.5) / n
        half = n // 2
        upper = np.array([self.quantile(u) for u in us[n - half :]])
        lower = -upper[::-1]
        if n % 2 == 1:
            return np.concatenate([lower, [0.0], upper])
        return np.concatenate([lower, upper])

    def as_quantile_function(self) -> QuantileFunction:
        A = self.support_radius
        return QuantileFunction(self.quantile, -A, A)

    def potential(self) -> Potential:
        if self.family == CONFINING:
            return quartic_confining(self.param)
        return quartic_nonconfining(self.param)

    def params(self) -> dict:
        out = {
            "family": self.family,
            "a": self.a,
            "support": [-self.support_radius, self.support_radius],
        }
        if self.family == CONFINING:
            out["c"] = self.param
            out["b"] = self.b
        else:
            out["g"] = self.param
        return out


def _check_normalized(eq: EquilibriumDensity) -> EquilibriumDensity:
    mass = eq.total_mass()
    if abs(mass - 1.0) > 1e-8:
        raise ValueError(f"density normalization failed: integral = {mass!r}")
    return eq


def confining_equilibrium(c: float) -> EquilibriumDensity:
    """Equilibrium measure for V = x^4/4 + c x^2/2; unique for c > -2."""
    c = float(c)
    if c <= -2.0:
        raise ValueError("c must exceed -2 (multiple stationary measures below)")
    a2 = (math.sqrt(4.0 * c * c + 48.0) - 2.0 * c) / 3.0
    b = (c + math.sqrt(c * c / 4.0 + 3.0)) / 3.0
    a = math.sqrt(a2)
    return _check_normalized(
        EquilibriumDensity(family=CONFINING, param=c, a=a, b=b, support_radius=a)
    )


def nonconfining_equilibrium(g: float) -> EquilibriumDensity:
    """Equilibrium measure for V = g x^4/4 + x^2/2; requires g > -1/12.

    a^2 solves 3g a^4 + a^2 = 1 on the branch continuous at g = 0 (a^2 -> 1).
    """
    g = float(g)
    if g <= -1.0 / 12.0:
        raise ValueError("g must exceed -1/12")
    if g == 0.0:
        a2 = 1.0
    else:
        a2 = (-1.0 + math.sqrt(1.0 + 12.0 * g)) / (6.0 * g)
    a = math.sqrt(a2)
    return _check_normalized(
        EquilibriumDensity(family=NONCONFINING, param=g, a=a, b=0.0, support_radius=2.0 * a)
    )


def cauchy_transform(eq: EquilibriumDensity, z: complex) -> complex:
    """Stieltjes transform of the nonconfining equilibrium, G(z) ~ 1/z at infinity.

    G(z) = (z + g z^3)/2 - (1 + 2ga^2 + g z^2)/2 * sqrt(z^2 - 4a^2), with the
    branch of the square root cut along the support, so that -Im G(x+i0)/pi
    recovers the density.
    """
    if eq.family != NONCONFINING:
        raise ValueError("closed-form Cauchy transform is defined for the nonconfining family")
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("z must have nonzero imaginary part")
    g = eq.param
    a2 = eq.a * eq.a
    two_a = 2.0 * eq.a
    # principal-branch product has its cut exactly on [-2a, 2a] and ~ z at infinity
    w = np.sqrt(complex(z - two_a)) * np.sqrt(complex(z + two_a))
    return 0.5 * (z + g * z**3) - 0.5 * (1.0 + 2.0 * g * a2 + g * z * z) * w
