"""Explicit convergence constants for the log-gas flow.

Bundles the moment bounds, the interaction-convexity threshold beta*, and the
certified half-rate lambda = min(alpha, beta* - beta)/2 realized by the HWI
machinery, specialized to the quartic families. The certified rates are
conservative lower bounds; observed decay is typically orders faster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .potentials import (
    QUARTIC_CONFINING,
    PerturbedPotential,
    Potential,
    convexity_profile,
    perturbation_norm,
)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RateConstants:
    r: float
    alpha: float
    beta: float
    gamma: float
    M: float
    p: float
    beta_star: float
    lam: float

    def __post_init__(self):
        if not (self.r > 0 and self.gamma > 0 and self.M > 0):
            raise ValueError("r, gamma and M must be positive")
        expected_bs = beta_star(self.r, self.M, self.p, self.gamma)
        if not math.isclose(self.beta_star, expected_bs, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("beta_star inconsistent with (r, M, p, gamma)")
        expected_lam = lambda_rate(self.alpha, self.beta, self.beta_star)
        if not math.isclose(self.lam, expected_lam, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("lambda inconsistent with (alpha, beta, beta_star)")

    @property
    def rate_2lambda(self) -> float:
        return 2.0 * self.lam

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "M": self.M,
            "p": self.p,
            "beta_star": self.beta_star,
            "lambda": self.lam,
            "rate_2lambda": self.rate_2lambda,
        }


def beta_star(r: float, M: float, p: float = 2.0, gamma: float | None = None) -> float:
    """gamma * (1 - 2^(p+1) M / r^p); may be negative (no convexity gain)."""
    if r <= 0 or M <= 0:
        raise ValueError("r and M must be positive")
    if p < 2:
        raise ValueError("p must be >= 2")
    if gamma is None:
        gamma = log_interaction_gamma(r)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return gamma * (1.0 - 2.0 ** (p + 1) * M / r**p)


def log_interaction_gamma(r: float, sharp: bool = False) -> float:
    """Convexity lower bound of the log interaction on |x| <= 2r.

    The default is 1/(4r^2). W''(x) = 2/x^2 >= 1/(2r^2) on |x| <= 2r would
    permit twice that; the sharper constant is opt-in so the default rates
    stay comparable across runs.
    """
    return (0.5 if sharp else 0.25) / (r * r)


def lambda_rate(alpha: float, beta: float, beta_star_value: float) -> float:
    """Half of min(alpha, beta* - beta); positive iff a rate is certified."""
    return 0.5 * min(alpha, beta_star_value - beta)


def moment_bound_quartic(c: float, m2_init: float) -> float:
    """Uniform second-moment bound max(1+sqrt(2), m2(0)) for V = x^4/4 + c x^2/2."""
    if not -2.0 < c < 2.0:
        raise ValueError("quartic moment bound requires -2 < c < 2")
    if m2_init < 0:
        raise ValueError("m2_init must be nonnegative")
    return max(1.0 + SQRT2, m2_init)


def _qtilde_root(abs_coeffs: list[float], n: int, pert_top: int | None, constant: float) -> float:
    """Largest root of constant - x + sum_k |a_2k| x^(k/n) + sum_{k<=m} x^(k/n)."""

    def q(x: float) -> float:
        val = constant - x
        for k, a in enumerate(abs_coeffs, start=1):
            if a != 0.0:
                val += a * x ** (k / n)
        if pert_top is not None:
            for k in range(pert_top + 1):
                val += x ** (k / n)
        return val

    # q(0) = constant (+1 if a perturbation exists) > 0; q -> -inf since every
    # non-linear exponent is k/n <= (n-1)/n < 1
    hi = 1.0
    while q(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e30:
            raise RuntimeError("moment bound bracketing failed")
    # march a geometric grid to find the last sign change (largest root)
    grid = np.geomspace(1e-12, hi, 400)
    vals = np.array([q(float(x)) for x in grid])
    sign_changes = np.nonzero((vals[:-1] >= 0) & (vals[1:] < 0))[0]
    lo, hi = (grid[sign_changes[-1]], grid[sign_changes[-1] + 1]) if sign_changes.size else (0.0, hi)
    return float(brentq(q, lo, hi, xtol=1e-13, rtol=8.9e-16))


def moment_bound_general(pp: PerturbedPotential, halved: bool = False) -> float:
    """Uniform bound on m_{2n} for stationary measures of a perturbed normal-form potential.

    The bound is the largest root of
        Q(x) = 1 - x + sum_k |a_{2k}| x^(k/n) + sum_{k=0}^{m} x^(k/n),
    where the perturbation terms carry the unit coefficient budget, so the
    bound does not depend on the actual perturbation values. ``halved``
    computes the variant with constant 1/2 instead of 1 (reported for
    comparison; the unhalved identity is the authoritative one, as fixed by
    the semicircle cross-check m4 + c m2 = 1).
    """
    base = pp.base
    if base.kind != "general_even":
        raise ValueError("base potential must be in the normal form (general_even)")
    if perturbation_norm(pp) > 1.0 + 1e-12:
        raise ValueError("perturbation coefficients must satisfy sup |b_2k| <= 1")
    n = base.n
    abs_coeffs = [abs(c) for c in base.coeffs]
    pert_top = len(pp.perturbation) - 1 if pp.perturbation else None
    constant = 0.5 if halved else 1.0
    return _qtilde_root(abs_coeffs, n, pert_top, constant)


@dataclass(frozen=True)
class BetaStarEqResult:
    found: bool
    r_best: float | None
    value: float | None


def beta_star_eq(
    p: float,
    M: float,
    r0: float,
    r_max: float,
    sharp_gamma: bool = False,
) -> BetaStarEqResult:
    """Maximize beta*(r) = gamma(r) (1 - 2^(p+1) M / r^p) over r in [r0, r_max].

    gamma(r) = 1/(4 r^2) unless ``sharp_gamma``. Geometric grid then bounded
    refinement to relative tolerance 1e-8; an empty positive set is flagged.
    """
    if r0 <= 0 or r_max <= r0:
        raise ValueError("need 0 < r0 < r_max")

    def objective(r: float) -> float:
        return beta_star(r, M, p, log_interaction_gamma(r, sharp=sharp_gamma))

    grid = np.geomspace(r0, r_max, 4000)
    vals = np.array([objective(float(r)) for r in grid])
    k = int(np.argmax(vals))
    if vals[k] <= 0.0:
        return BetaStarEqResult(found=False, r_best=None, value=None)
    lo = grid[max(0, k - 1)]
    hi = grid[min(grid.size - 1, k + 1)]
    res = minimize_scalar(
        lambda r: -objective(r), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10 * grid[k]},
    )
    r_best = float(res.x)
    return BetaStarEqResult(found=True, r_best=r_best, value=float(objective(r_best)))


def certified_rate(
    potential: Potential,
    m2_init: float,
    r_max: float | None = None,
    sharp_gamma: bool = False,
) -> RateConstants | None:
    """Best certified rate constants for a confining quartic, or None.

    Searches r >= sqrt(max(0,-c)/3) for the maximizer of
    lambda(r) = min(alpha(r), beta*(r) - beta)/2 with M = max(1+sqrt(2), m2(0)).
    Returns None when no positive rate is certified.
    """
    if potential.kind != QUARTIC_CONFINING:
        raise ValueError("certified rates are implemented for the confining quartic")
    c = potential.c
    M = moment_bound_quartic(c, m2_init)
    p = 2.0
    r_lo = max(math.sqrt(max(0.0, -c) / 3.0), 1e-6)
    if r_max is None:
        r_max = 40.0 * math.sqrt(M)

    def lam_of(r: float) -> float:
        alpha, beta = convexity_profile(potential, r)
        gamma = log_interaction_gamma(r, sharp=sharp_gamma)
        return lambda_rate(alpha, beta, beta_star(r, M, p, gamma))

    grid = np.geomspace(r_lo, r_max, 4000)
    vals = np.array([lam_of(float(r)) for r in grid])
    k = int(np.argmax(vals))
    lo = grid[max(0, k - 1)]
    hi = grid[min(grid.size - 1, k + 1)]
    res = minimize_scalar(
        lambda r: -lam_of(r), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10 * grid[k]},
    )
    r_best = float(res.x)
    lam = lam_of(r_best)
    if lam <= 0.0:
        return None
    alpha, beta = convexity_profile(potential, r_best)
    gamma = log_interaction_gamma(r_best, sharp=sharp_gamma)
    bs = beta_star(r_best, M, p, gamma)
    return RateConstants(
        r=r_best, alpha=alpha, beta=beta, gamma=gamma, M=M, p=p, beta_star=bs,
        lam=lambda_rate(alpha, beta, bs),
    )


def nonconfining_support_bound(m: float, g: float) -> float | None:
    """Smallest M >= m with m^2 + 2 sqrt(2) M / sqrt(1+3gM^2) + 1/(1+3gM^2) <= M^2.

    The search is restricted to 1 + 3 g M^2 > 0. Returns None when no M
    qualifies, or when the printed admissibility condition g > -1/(3M) fails.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    if g > 0:
        raise ValueError("the support bound applies to g <= 0")

    def slack(M: float) -> float:
        a = 1.0 + 3.0 * g * M * M
        return M * M - (m * m + 2.0 * SQRT2 * M / math.sqrt(a) + 1.0 / a)

    if g == 0.0:
        upper = m + 10.0 + 2.0 * SQRT2
    else:
        upper = (1.0 - 1e-12) / math.sqrt(-3.0 * g)
        if upper <= m:
            return None
    grid = np.linspace(m, upper, 20000)
    vals = np.array([slack(float(M)) for M in grid])
    feasible = np.nonzero(vals >= 0.0)[0]
    if feasible.size == 0:
        return None
    k = int(feasible[0])
    if k == 0:
        m_star = float(grid[0])
    else:
        m_star = float(brentq(slack, grid[k - 1], grid[k], xtol=1e-12, rtol=8.9e-16))
    if not g > -1.0 / (3.0 * m_star):
        return None
    return m_star


def support_bound_report(m: float, g: float) -> dict:
    """Support radius with provenance: certified value when it exists, else the
    g=0 fallback radius (flagged), plus the admissibility variants."""
    certified = nonconfining_support_bound(m, g)
    fallback = nonconfining_support_bound(m, 0.0)
    M_used = certified if certified is not None else fallback
    out = {
        "m": m,
        "g": g,
        "M_star": certified,
        "M_star_g0": fallback,
        "radius_used": M_used,
        "certified": certified is not None,
        "admissibility_as_printed": None if M_used is None else bool(g > -1.0 / (3.0 * M_used)),
        "admissibility_squared_variant": None
        if M_used is None
        else bool(g > -1.0 / (3.0 * M_used * M_used)),
    }
    return out
