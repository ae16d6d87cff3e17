"""Figures from log-gas run directories.

Consumes only the documented output contract of a run directory:

* ``series.csv`` with header ``t,m2,entropy,fisher,w2,support_radius``
* ``meta.json`` (target_discrete_entropy, hard_radius, config echo)
* ``constants.json`` (optional; certified lambda for envelopes and margins)
* ``density.csv`` (optional; x,density pairs of the target measure)
* ``snapshot_<k>.csv`` (single-column particle positions)

Three figure kinds: ``decay`` (log-y W2 with the certified envelope),
``density_overlay`` (final-snapshot histogram against the target density) and
``margins`` (log-Sobolev / transportation margins over time).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SERIES_COLUMNS = ["t", "m2", "entropy", "fisher", "w2", "support_radius"]
KINDS = ("decay", "density_overlay", "margins")


class MissingColumnError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    input_dir: str
    kind: str
    output_path: str
    log_scale: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def load_series(run_dir: Path) -> dict[str, np.ndarray]:
    path = run_dir / "series.csv"
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    series = {}
    for col in SERIES_COLUMNS:
        if col not in header:
            raise MissingColumnError(f"series.csv is missing column {col!r}")
        series[col] = data[:, header.index(col)]
    return series


def load_meta(run_dir: Path) -> dict:
    path = run_dir / "meta.json"
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    return json.loads(path.read_text())


def load_lambda(run_dir: Path) -> float | None:
    path = run_dir / "constants.json"
    if not path.is_file():
        return None
    return json.loads(path.read_text()).get("lambda")


def load_target_density(run_dir: Path):
    path = run_dir / "density.csv"
    if not path.is_file():
        return None
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    for col in ("x", "density"):
        if col not in header:
            raise MissingColumnError(f"density.csv is missing column {col!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, header.index("x")], data[:, header.index("density")]


def last_snapshot(run_dir: Path) -> np.ndarray:
    paths = sorted(
        run_dir.glob("snapshot_*.csv"),
        key=lambda p: int(re.search(r"snapshot_(\d+)", p.name).group(1)),
    )
    if not paths:
        raise FileNotFoundError(f"no snapshot_<k>.csv files in {run_dir}")
    return np.loadtxt(paths[-1], ndmin=1)


def _relative_entropy(series, meta) -> np.ndarray | None:
    target = meta.get("target_discrete_entropy")
    if target is None:
        return None
    return series["entropy"] - float(target)


def _render_decay(ax, run_dir: Path, series, meta, log_scale: bool):
    t, w2 = series["t"], series["w2"]
    keep = np.isfinite(w2) & (w2 > 0)
    ax.plot(t[keep], w2[keep], lw=1.2, label="W2 to target")
    lam = load_lambda(run_dir)
    rel = _relative_entropy(series, meta)
    if lam and rel is not None and rel[0] > 0:
        envelope = math.sqrt(rel[0] / lam) * np.exp(-2 * lam * t)
        ax.plot(t, envelope, "--", lw=1.0, label=r"$\sqrt{\Sigma_0/\lambda}\,e^{-2\lambda t}$")
    ax.set_yscale("log")
    if log_scale:
        ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("W2")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Wasserstein decay")


def _render_density_overlay(ax, run_dir: Path, series, meta, log_scale: bool):
    positions = last_snapshot(run_dir)
    bins = max(20, int(np.sqrt(positions.size) * 1.5))
    ax.hist(positions, bins=bins, density=True, alpha=0.45, label="final particles")
    target = load_target_density(run_dir)
    if target is not None:
        xs, dens = target
        ax.plot(xs, dens, lw=1.4, label="target density")
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Final state vs equilibrium density")


def _render_margins(ax, run_dir: Path, series, meta, log_scale: bool):
    t = series["t"]
    lam = load_lambda(run_dir)
    rel = _relative_entropy(series, meta)
    drew = False
    if lam and rel is not None:
        logsob = series["fisher"] - 4 * lam * rel
        transport = np.sqrt(np.clip(rel, 0, None) / lam) - series["w2"]
        ax.plot(t, logsob, lw=1.0, label=r"$D - 4\lambda\,\Sigma_{rel}$")
        ax.plot(t, transport, lw=1.0, label=r"$\sqrt{\Sigma_{rel}/\lambda} - W_2$")
        drew = True
    radius = meta.get("hard_radius")
    if radius is not None:
        ax.plot(t, float(radius) - series["support_radius"], lw=1.0,
                label="containment margin")
        drew = True
    if not drew:
        raise FileNotFoundError(
            "margins figure needs a certified lambda (constants.json) or a "
            "containment radius (meta.json)"
        )
    ax.axhline(0.0, color="k", lw=0.6)
    ax.axhline(-0.02, color="r", lw=0.6, ls=":", label="tolerance")
    if log_scale:
        ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("margin")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Inequality margins")


_RENDERERS = {
    "decay": _render_decay,
    "density_overlay": _render_density_overlay,
    "margins": _render_margins,
}


def render(spec: FigureSpec) -> Path:
    """Render the figure described by ``spec``; returns the written path."""
    run_dir = Path(spec.input_dir)
    series = load_series(run_dir)
    meta = load_meta(run_dir)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=130)
    try:
        _RENDERERS[spec.kind](ax, run_dir, series, meta, spec.log_scale)
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(out)
    finally:
        plt.close(fig)
    return out
