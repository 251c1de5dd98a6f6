"""plots render <run-dir> [--times t1,t2] [--format svg|png] [--out dir]"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import SchemaError, TraceBundle
from . import render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plots")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render all figures for a run directory")
    sp.add_argument("run_dir")
    sp.add_argument("--times", type=lambda s: [float(v) for v in s.split(",") if v],
                    default=None)
    sp.add_argument("--format", choices=("svg", "png"), default="svg")
    sp.add_argument("--out", default=None)
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        bundle = TraceBundle.open(args.run_dir)
        outdir = Path(args.out or (Path(args.run_dir) / "figures"))
        outdir.mkdir(parents=True, exist_ok=True)
        times = args.times if args.times is not None else bundle.snapshot_times
        written = []
        if times:
            written += render.plot_profiles(bundle, times, outdir, args.format)
        written.append(render.plot_xt(bundle, outdir, args.format))
        written.append(render.plot_functionals(bundle, outdir, args.format))
        for w in written:
            print(w)
        return 0
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
