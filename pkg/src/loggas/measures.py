"""Particle measures, moments, symmetrization and exact 1D Wasserstein-2 distances.

A ParticleEnsemble is a sorted list of N strictly distinct positions carrying
uniform weights 1/N. In one dimension the optimal quadratic coupling between
two such measures matches sorted positions, so W2 is exact and O(N log N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_MAX_RESAMPLE = 5_000_000


@dataclass(frozen=True)
class ParticleEnsemble:
    """Sorted uniform-weight atoms; strictly increasing positions, N >= 1."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64).copy()
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions must be a nonempty 1D array")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if pos.size > 1 and not np.all(np.diff(pos) > 0.0):
            raise ValueError("positions must be strictly increasing (coincident particles)")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.size

    def __len__(self) -> int:
        return self.positions.size


def ensemble_from_unsorted(values) -> ParticleEnsemble:
    return ParticleEnsemble(np.sort(np.asarray(values, dtype=np.float64)))


@dataclass(frozen=True)
class QuantileFunction:
    """Inverse CDF on (0,1) with declared support bounds."""

    evaluator: Callable[[float], float]
    lo: float
    hi: float

    def __post_init__(self):
        us = np.linspace(0.02, 0.98, 33)
        vals = np.array([self.evaluator(u) for u in us])
        if np.any(np.diff(vals) < 0):
            raise ValueError("quantile evaluator must be nondecreasing")
        if vals.min() < self.lo - 1e-9 or vals.max() > self.hi + 1e-9:
            raise ValueError("quantile values leave the declared support")

    def __call__(self, u: float) -> float:
        if not 0.0 < u < 1.0:
            raise ValueError("u must lie in (0,1)")
        return float(self.evaluator(u))


def moment(ensemble: ParticleEnsemble, p: float) -> float:
    """(1/N) sum |x_i|^p for p >= 1."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(np.abs(ensemble.positions) ** p))


def signed_moment(ensemble: ParticleEnsemble, k: int) -> float:
    """(1/N) sum x_i^k, summed over mirror pairs so antisymmetry cancels exactly."""
    x = ensemble.positions
    n = x.size
    half = n // 2
    pair = x[:half] ** k + x[n - half :][::-1] ** k
    total = float(np.sum(pair))
    if n % 2 == 1:
        total += float(x[half] ** k)
    return total / n


def symmetrize(ensemble: ParticleEnsemble) -> ParticleEnsemble:
    """Replace mirror pairs by +/- (|x_i| + |x_{N+1-i}|)/2; exactly antisymmetric output."""
    n = ensemble.n
    if n % 2 != 0:
        raise ValueError("symmetrize requires an even particle count")
    x = ensemble.positions
    half = n // 2
    left = x[:half]
    right = x[half:][::-1]
    s = 0.5 * (np.abs(left) + np.abs(right))  # descending for near-symmetric input
    out = np.concatenate([-s, s[::-1]])
    return ParticleEnsemble(out)


def max_asymmetry(ensemble: ParticleEnsemble) -> float:
    """max_i |x_i + x_{N+1-i}|, zero iff the position list is exactly antisymmetric."""
    x = ensemble.positions
    return float(np.max(np.abs(x + x[::-1])))


def _resample(x: np.ndarray, m: int) -> np.ndarray:
    # quantile duplication: each atom repeated m/N times keeps the measure
    return np.repeat(x, m // x.size)


def w2(a: ParticleEnsemble, b: ParticleEnsemble) -> float:
    """Exact W2 between uniform-atom measures via the sorted (monotone) coupling."""
    xa, xb = a.positions, b.positions
    if xa.size != xb.size:
        m = math.lcm(xa.size, xb.size)
        if m > _MAX_RESAMPLE:
            raise ValueError(f"lcm resampling to {m} atoms is too large")
        xa, xb = _resample(xa, m), _resample(xb, m)
    return float(np.sqrt(np.mean((xa - xb) ** 2)))


def w2_to_density(a: ParticleEnsemble, q: QuantileFunction | Callable[[float], float]) -> float:
    """W2 to a continuum measure via the midpoint-quantile coupling u_i = (i-1/2)/N."""
    x = a.positions
    n = x.size
    us = (np.arange(1, n + 1) - 0.5) / n
    qs = np.array([q(u) for u in us])
    return float(np.sqrt(np.mean((x - qs) ** 2)))


def save_positions_csv(ensemble: ParticleEnsemble, path) -> None:
    """Single-column CSV, full double precision (shortest round-trip repr)."""
    with open(path, "w") as fh:
        for v in ensemble.positions:
            fh.write(f"{float(v)!r}\n")


def load_positions_csv(path) -> ParticleEnsemble:
    values = np.loadtxt(path, dtype=np.float64, ndmin=1)
    return ParticleEnsemble(values)
