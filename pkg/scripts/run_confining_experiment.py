#!/usr/bin/env python3
"""Run the near-critical confining quartic end to end and render figures.

Usage: python scripts/run_confining_experiment.py [--out DIR] [--config PATH]
"""

import argparse
import shutil
import subprocess
import sys
from pathlib import Path

from loggas.cli import main as loggas_main

ROOT = Path(__file__).resolve().parent.parent


def render_figures(run_dir: Path, out_dir: Path) -> None:
    exe = shutil.which("loggas-plots")
    if exe is None:
        print("loggas-plots not installed; skipping figures")
        return
    for kind in ("decay", "density_overlay", "margins"):
        subprocess.run(
            [exe, kind, "--in", str(run_dir), "--out", str(out_dir / f"{kind}.png")],
            check=True,
        )


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results/confining")
    parser.add_argument("--config", default=str(ROOT / "configs" / "quartic_small_c.json"))
    args = parser.parse_args()
    out = Path(args.out)
    code = loggas_main(["pipeline", "--config", args.config, "--out", str(out)])
    if code != 0:
        return code
    render_figures(out / "run", out)
    print(f"done: {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
