"""Checks of the convergence inequalities on simulated trajectories.

Margins follow the convention margin = (permitted side) - (bounded side), so a
check passes when its worst margin is not below the discrete-estimator
tolerance. The default tolerance 0.02 covers the O(log N / N) bias of the
off-diagonal entropy estimator at N >= 1000 (about 0.007 at N = 1000).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import RateConstants
from .dynamics import Trajectory
from .equilibrium import EquilibriumDensity
from .functionals import entropy_discrete, fisher_discrete
from .measures import ParticleEnsemble, max_asymmetry, w2
from .potentials import Potential

DEFAULT_TOL = 0.02
ENTROPY_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    worst_margin: float | None = None
    where: float | int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "worst_margin": self.worst_margin,
            "where": self.where,
            **({"details": self.details} if self.details else {}),
        }


@dataclass
class VerificationReport:
    checks: list[CheckRecord]
    fitted_rate: float | None = None
    fitted_r2: float | None = None
    certified_rate_2lambda: float | None = None
    noise_floor: float | None = None
    notes: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "fitted_rate": self.fitted_rate,
            "fitted_r2": self.fitted_r2,
            "certified_rate_2lambda": self.certified_rate_2lambda,
            "noise_floor": self.noise_floor,
            "all_passed": self.all_passed,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            tag = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[c.status]
            margin = "" if c.worst_margin is None else f" worst_margin={c.worst_margin:.6g}"
            where = "" if c.where is None else f" at {c.where!r}"
            lines.append(f"[{tag}] {c.name}{margin}{where}")
        if self.fitted_rate is not None:
            lines.append(
                f"fitted decay rate {self.fitted_rate:.6g} (r^2={self.fitted_r2:.4f})"
                + (
                    f" vs certified {self.certified_rate_2lambda:.6g}"
                    if self.certified_rate_2lambda
                    else ""
                )
            )
        return lines


def fit_exponential_rate(
    times, values, floor: float | None = None
) -> tuple[float, float, float]:
    """Least-squares line on (t, log v); returns (rate, intercept, r_squared).

    Points at or below the noise floor (default 1e-8, or the supplied
    discretization floor if larger) are dropped before fitting.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    eff_floor = max(1e-8, floor if floor is not None else 0.0)
    keep = np.isfinite(v) & (v > eff_floor)
    t, v = t[keep], v[keep]
    if t.size < 3:
        raise ValueError("fewer than 3 usable points above the noise floor")
    y = np.log(v)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(intercept), float(r2)


def check_hwi(
    rho0: ParticleEnsemble,
    rho1: ParticleEnsemble,
    potential: Potential,
    lam: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """Margin of Sigma(rho0) - Sigma(rho1) <= W2 sqrt(D(rho0)) - lam W2^2.

    Both inputs must be symmetric (exactly antisymmetric positions up to 1e-9);
    the inequality is only claimed for symmetric measures.
    """
    for name, rho in (("rho0", rho0), ("rho1", rho1)):
        if max_asymmetry(rho) > 1e-9:
            raise ValueError(f"{name} is not symmetric within 1e-9")
    dist = w2(rho0, rho1)
    lhs = entropy_discrete(rho0, potential) - entropy_discrete(rho1, potential)
    rhs = dist * math.sqrt(max(0.0, fisher_discrete(rho0, potential))) - lam * dist * dist
    return float(rhs - lhs)


def _relative_entropy_series(traj: Trajectory) -> np.ndarray:
    target_entropy = traj.meta.get("target_discrete_entropy")
    if target_entropy is None:
        raise ValueError("trajectory has no target entropy; was a target configured?")
    return traj.entropy - float(target_entropy)


def check_logsob(
    traj: Trajectory, lam: float, tol: float = DEFAULT_TOL
) -> CheckRecord:
    """4 lam Sigma(mu_t | mu_inf) <= D(mu_t) at every recorded time."""
    rel = _relative_entropy_series(traj)
    margins = traj.fisher - 4.0 * lam * rel
    allowed = -tol * (1.0 + traj.fisher)
    k = int(np.argmin(margins - allowed))
    status = "pass" if bool(np.all(margins >= allowed)) else "fail"
    return CheckRecord(
        name="log_sobolev",
        status=status,
        worst_margin=float(margins[k]),
        where=float(traj.times[k]),
        details={"lambda": lam, "tol": tol},
    )


def check_transport(
    traj: Trajectory, lam: float, tol: float = DEFAULT_TOL
) -> CheckRecord:
    """W2(mu_t, mu_inf) <= sqrt(Sigma(mu_t | mu_inf) / lam) at every recorded time."""
    rel = _relative_entropy_series(traj)
    ok = np.isfinite(traj.w2)
    rhs = np.sqrt(np.clip(rel[ok], 0.0, None) / lam)
    margins = rhs - traj.w2[ok]
    allowed = -tol * (1.0 + traj.w2[ok])
    k = int(np.argmin(margins - allowed))
    status = "pass" if bool(np.all(margins >= allowed)) else "fail"
    return CheckRecord(
        name="transportation",
        status=status,
        worst_margin=float(margins[k]),
        where=float(traj.times[ok][k]),
        details={"lambda": lam, "tol": tol},
    )


def check_hwi_pairs(
    traj: Trajectory,
    potential: Potential,
    lam: float,
    n_pairs: int = 50,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> CheckRecord:
    """HWI margins on randomly chosen ordered snapshot pairs."""
    snaps = traj.snapshots
    if len(snaps) < 2:
        return CheckRecord(name="hwi_pairs", status="skipped", details={"reason": "too few snapshots"})
    rng = np.random.default_rng(seed)
    worst = math.inf
    worst_pair = None
    for _ in range(n_pairs):
        i, j = rng.choice(len(snaps), size=2, replace=False)
        margin = check_hwi(snaps[i][1], snaps[j][1], potential, lam, tol)
        if margin < worst:
            worst = margin
            worst_pair = (int(i), int(j))
    status = "pass" if worst >= -tol else "fail"
    return CheckRecord(
        name="hwi_pairs",
        status=status,
        worst_margin=float(worst),
        where=str(worst_pair),
        details={"n_pairs": n_pairs, "lambda": lam, "tol": tol},
    )


def discretization_floor(traj: Trajectory) -> float:
    """Noise floor for rate fits: the stationary-state W2 plateau of the run."""
    w = traj.w2[np.isfinite(traj.w2)]
    if w.size == 0 or np.min(w) <= 0:
        return 1e-8
    return max(1e-8, 1.25 * float(np.min(w)))


def verify_convergence(
    traj: Trajectory,
    rates: RateConstants | None,
    potential: Potential | None = None,
    target: EquilibriumDensity | None = None,
    tol: float = DEFAULT_TOL,
    hwi_pairs: int = 50,
    lambda_scale: float = 1.0,
) -> VerificationReport:
    """Aggregate report: fitted decay rate vs the certified one, pointwise decay
    envelope, moment bound, support containment, entropy monotonicity, and the
    inequality suite. ``lambda_scale`` exists for falsifiability tests."""
    checks: list[CheckRecord] = []
    notes: dict = {}
    lam = rates.lam * lambda_scale if rates is not None else None
    floor = discretization_floor(traj)

    fitted_rate = fitted_r2 = None
    have_w2 = bool(np.any(np.isfinite(traj.w2)))
    if have_w2:
        try:
            fitted_rate, _, fitted_r2 = fit_exponential_rate(traj.times, traj.w2, floor)
        except ValueError as err:
            notes["rate_fit"] = str(err)

    # (a) fitted rate at least the certified 2 lambda
    if lam is not None and lam > 0 and fitted_rate is not None:
        checks.append(
            CheckRecord(
                name="rate_vs_certified",
                status="pass" if fitted_rate >= 2.0 * lam else "fail",
                worst_margin=float(fitted_rate - 2.0 * lam),
                where=None,
            )
        )
    else:
        checks.append(CheckRecord(name="rate_vs_certified", status="skipped"))

    # (b) pointwise envelope W2(t) <= sqrt(Sigma_rel(0)/lam) e^(-2 lam t) (1+tol)
    if lam is not None and lam > 0 and have_w2 and traj.meta.get("target_discrete_entropy") is not None:
        rel0 = float(_relative_entropy_series(traj)[0])
        if rel0 > 0:
            env = math.sqrt(rel0 / lam) * np.exp(-2.0 * lam * traj.times) * (1.0 + tol)
            mask = np.isfinite(traj.w2) & (traj.w2 > floor)
            if np.any(mask):
                margins = env[mask] - traj.w2[mask]
                k = int(np.argmin(margins))
                checks.append(
                    CheckRecord(
                        name="decay_envelope",
                        status="pass" if bool(np.all(margins >= 0.0)) else "fail",
                        worst_margin=float(margins[k]),
                        where=float(traj.times[mask][k]),
                        details={"sigma_rel_0": rel0},
                    )
                )
            else:
                checks.append(CheckRecord(name="decay_envelope", status="skipped"))
        else:
            checks.append(
                CheckRecord(
                    name="decay_envelope", status="skipped", details={"reason": "Sigma_rel(0) <= 0"}
                )
            )
    else:
        checks.append(CheckRecord(name="decay_envelope", status="skipped"))

    # (c) second-moment bound for the confining quartic
    if rates is not None:
        bound = rates.M + 0.05
        margins = bound - traj.m2
        k = int(np.argmin(margins))
        checks.append(
            CheckRecord(
                name="m2_bound",
                status="pass" if bool(np.all(margins >= 0.0)) else "fail",
                worst_margin=float(margins[k]),
                where=float(traj.times[k]),
                details={"bound": bound},
            )
        )
    else:
        checks.append(CheckRecord(name="m2_bound", status="skipped"))

    # (d) support containment for the non-confining family
    radius = traj.meta.get("hard_radius")
    if radius is not None:
        margins = float(radius) - traj.support_radius
        k = int(np.argmin(margins))
        checks.append(
            CheckRecord(
                name="containment",
                status="pass" if bool(np.all(margins >= 0.0)) else "fail",
                worst_margin=float(margins[k]),
                where=float(traj.times[k]),
                details={"radius": radius},
            )
        )
    else:
        checks.append(CheckRecord(name="containment", status="skipped"))

    # (e) entropy non-increasing along the flow
    diffs = np.diff(traj.entropy)
    if diffs.size:
        k = int(np.argmax(diffs))
        checks.append(
            CheckRecord(
                name="entropy_monotone",
                status="pass" if bool(np.all(diffs <= ENTROPY_MONOTONE_SLACK)) else "fail",
                worst_margin=float(ENTROPY_MONOTONE_SLACK - diffs[k]),
                where=float(traj.times[k + 1]),
            )
        )

    # inequality suite
    if lam is not None and traj.meta.get("target_discrete_entropy") is not None:
        checks.append(check_logsob(traj, lam, tol))
        if have_w2:
            checks.append(check_transport(traj, lam, tol))
        if potential is not None:
            seed = int(traj.meta.get("config", {}).get("seed", 0))
            checks.append(check_hwi_pairs(traj, potential, lam, hwi_pairs, seed, tol))

    notes["moment_bound_source"] = (
        "M = max(1+sqrt(2), m2(0)) dominates the running max of m2 along the run"
    )
    if lambda_scale != 1.0:
        notes["lambda_scale"] = lambda_scale
    return VerificationReport(
        checks=checks,
        fitted_rate=fitted_rate,
        fitted_r2=fitted_r2,
        certified_rate_2lambda=(2.0 * rates.lam if rates is not None else None),
        noise_floor=floor,
        notes=notes,
    )
