#!/usr/bin/env python3
"""Run the non-confining quartic (g = -0.05) end to end and render figures.

Usage: python scripts/run_nonconfining_experiment.py [--out DIR] [--config PATH]
"""

import argparse
import shutil
import subprocess
import sys
from pathlib import Path

from loggas.cli import main as loggas_main

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results/nonconfining")
    parser.add_argument("--config", default=str(ROOT / "configs" / "nonconfining_g005.json"))
    args = parser.parse_args()
    out = Path(args.out)
    code = loggas_main(["pipeline", "--config", args.config, "--out", str(out)])
    if code != 0:
        return code
    exe = shutil.which("loggas-plots")
    if exe is None:
        print("loggas-plots not installed; skipping figures")
        return 0
    for kind in ("decay", "density_overlay", "margins"):
        subprocess.run(
            [exe, kind, "--in", str(out / "run"), "--out", str(out / f"{kind}.png")],
            check=True,
        )
    print(f"done: {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
