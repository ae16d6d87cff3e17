"""loggas-plots <kind> --in DIR --out FILE.png [--log]"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loggas-plots", description="Render figures from a log-gas run directory"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_dir", required=True, help="run directory")
    parser.add_argument("--out", dest="output_path", required=True, help="output image path")
    parser.add_argument("--log", action="store_true", help="extra log-scale axis")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_dir=args.input_dir,
        kind=args.kind,
        output_path=args.output_path,
        log_scale=args.log,
    )
    try:
        out = render(spec)
    except (FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
