"""Even polynomial external potentials and their derivative/convexity queries.

Three families are representable:

* ``quartic_confining(c)``:  V(x) = x^4/4 + c x^2/2
* ``quartic_nonconfining(g)``:  V(x) = g x^4/4 + x^2/2  (non-confining for g < 0)
* ``general_even(n, coeffs)``:  V(x) = x^(2n)/(2n) + sum_k c_{2k} x^(2k)/(2k),
  the normal form with unit leading coefficient 1/(2n).

All represented potentials are even, so solutions started from symmetric data
stay symmetric and no center-of-mass bookkeeping is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QUARTIC_CONFINING = "quartic_confining"
QUARTIC_NONCONFINING = "quartic_nonconfining"
GENERAL_EVEN = "general_even"


@dataclass(frozen=True)
class Potential:
    """An even polynomial potential; build via the factory functions below."""

    kind: str
    c: float = 0.0
    g: float = 0.0
    n: int = 0
    coeffs: tuple[float, ...] = ()
    # full monomial coefficients of V, lowest order first
    _poly: tuple[float, ...] = field(default=(), repr=False)

    def eval(self, x, order: int = 0):
        return evaluate(self, x, order)

    def __call__(self, x):
        return evaluate(self, x, 0)

    def to_config(self) -> dict:
        if self.kind == QUARTIC_CONFINING:
            return {"kind": self.kind, "c": self.c}
        if self.kind == QUARTIC_NONCONFINING:
            return {"kind": self.kind, "g": self.g}
        return {"kind": self.kind, "n": self.n, "coeffs": list(self.coeffs)}


def quartic_confining(c: float) -> Potential:
    """V(x) = x^4/4 + c x^2/2."""
    c = float(c)
    poly = (0.0, 0.0, c / 2.0, 0.0, 0.25)
    return Potential(kind=QUARTIC_CONFINING, c=c, _poly=poly)


def quartic_nonconfining(g: float) -> Potential:
    """V(x) = g x^4/4 + x^2/2; genuinely non-confining only for g < 0."""
    g = float(g)
    poly = (0.0, 0.0, 0.5, 0.0, g / 4.0)
    return Potential(kind=QUARTIC_NONCONFINING, g=g, _poly=poly)


def general_even(n: int, coeffs=()) -> Potential:
    """Normal form V(x) = x^(2n)/(2n) + sum_{k=1}^{n-1} c_{2k} x^(2k)/(2k).

    ``coeffs`` lists c_2, c_4, ... (at most n-1 of them).
    """
    n = int(n)
    if n < 1:
        raise ValueError("leading exponent 2n requires n >= 1")
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) > n - 1:
        raise ValueError("lower-order coefficients must stop below degree 2n")
    poly = [0.0] * (2 * n + 1)
    poly[2 * n] = 1.0 / (2 * n)
    for k, c2k in enumerate(coeffs, start=1):
        poly[2 * k] = c2k / (2 * k)
    return Potential(kind=GENERAL_EVEN, n=n, coeffs=coeffs, _poly=tuple(poly))


def from_config(cfg: dict) -> Potential:
    kind = cfg["kind"]
    if kind == QUARTIC_CONFINING:
        return quartic_confining(cfg["c"])
    if kind == QUARTIC_NONCONFINING:
        return quartic_nonconfining(cfg["g"])
    if kind == GENERAL_EVEN:
        return general_even(cfg["n"], cfg.get("coeffs", ()))
    raise ValueError(f"unknown potential kind {kind!r}")


def _derived_coeffs(poly: tuple[float, ...], order: int) -> np.ndarray:
    c = np.array(poly, dtype=float)
    for _ in range(order):
        c = c[1:] * np.arange(1, c.size)
        if c.size == 0:
            c = np.zeros(1)
    return c


def evaluate(potential: Potential, x, order: int = 0):
    """Evaluate V, V' or V'' at x (scalar or array), exactly as a polynomial."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if potential.kind == QUARTIC_CONFINING:
        c = potential.c
        xx = np.asarray(x, dtype=float)
        if order == 0:
            out = 0.25 * xx**4 + 0.5 * c * xx**2
        elif order == 1:
            out = xx**3 + c * xx
        else:
            out = 3.0 * xx**2 + c
        return out if np.ndim(x) else float(out)
    if potential.kind == QUARTIC_NONCONFINING:
        g = potential.g
        xx = np.asarray(x, dtype=float)
        if order == 0:
            out = 0.25 * g * xx**4 + 0.5 * xx**2
        elif order == 1:
            out = g * xx**3 + xx
        else:
            out = 3.0 * g * xx**2 + 1.0
        return out if np.ndim(x) else float(out)
    coeffs = _derived_coeffs(potential._poly, order)
    out = np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)
    return out if np.ndim(x) else float(out)


def _poly_min_on_interval(coeffs: np.ndarray, lo: float, hi: float) -> float:
    """Min of the polynomial with given monomial coefficients on [lo, hi]."""
    candidates = [lo, hi]
    dcoeffs = coeffs[1:] * np.arange(1, coeffs.size)
    if dcoeffs.size > 0 and np.any(dcoeffs != 0.0):
        roots = np.polynomial.polynomial.polyroots(dcoeffs)
        for r in roots:
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                candidates.append(r.real)
    vals = np.polynomial.polynomial.polyval(np.array(candidates), coeffs)
    return float(np.min(vals))


def convexity_profile(potential: Potential, r: float) -> tuple[float, float]:
    """(alpha, beta) with alpha = inf_{|x|>=r} V'' and beta = max(0, -inf_{|x|<=r} V'').

    Rejects potentials whose V'' is unbounded below at infinity.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if potential.kind == QUARTIC_CONFINING:
        c = potential.c
        # V'' = 3x^2 + c is even and increasing in |x|
        return 3.0 * r * r + c, max(0.0, -c)
    if potential.kind == QUARTIC_NONCONFINING:
        g = potential.g
        if g < 0:
            raise ValueError("V'' = 3g x^2 + 1 is unbounded below for g < 0")
        # g >= 0: V'' increasing in |x|
        return 3.0 * g * r * r + 1.0, max(0.0, -1.0)
    # general even normal form: V'' -> +inf; past the largest critical point of
    # V'' the polynomial is increasing, so a finite interval captures the inf
    d2 = _derived_coeffs(potential._poly, 2)
    d3 = d2[1:] * np.arange(1, d2.size)
    big = r + 1.0
    if d3.size > 0 and np.any(d3 != 0.0):
        roots = np.polynomial.polynomial.polyroots(d3)
        real = [abs(z.real) for z in roots if abs(z.imag) < 1e-12]
        if real:
            big = max(big, max(real) + 1.0)
    alpha = _poly_min_on_interval(d2, r, big)
    inner = _poly_min_on_interval(d2, 0.0, r)
    return alpha, max(0.0, -inner)


@dataclass(frozen=True)
class PerturbedPotential:
    """Convex even base V* plus an even perturbation V_*(x) = sum_k b_{2k} x^(2k).

    ``perturbation`` lists b_0, b_2, ..., b_{2m}; the perturbation degree must
    be strictly below the base degree.
    """

    base: Potential
    perturbation: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "perturbation", tuple(float(b) for b in self.perturbation))
        base_deg = len(self.base._poly) - 1
        pert_deg = 2 * (len(self.perturbation) - 1) if self.perturbation else -1
        if pert_deg >= base_deg:
            raise ValueError("perturbation degree must be strictly below the base degree")


def perturbation_norm(p: PerturbedPotential) -> float:
    """Sup of absolute perturbation coefficients (0 for an empty perturbation)."""
    if not p.perturbation:
        return 0.0
    return float(max(abs(b) for b in p.perturbation))
