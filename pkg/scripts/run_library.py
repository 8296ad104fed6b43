#!/usr/bin/env python3
"""Run the full place/route/fix flow over the fixture library and print a
per-cell summary table."""

import argparse
import sys

from cellgen.library import generate_library
from cellgen.pipeline import PipelineOptions, run_pipeline
from cellgen.tech import load_tech


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", default="library-run")
    ap.add_argument("--config")
    ap.add_argument("--steps", type=int, default=8000)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--library-seed", type=int, default=1)
    args = ap.parse_args()

    tech = load_tech(args.config)
    opts = PipelineOptions(steps=args.steps, restarts=args.restarts, jobs=args.jobs)
    print(f"{'cell':10s} {'width':>5s} {'bound':>5s} {'drc':>4s} {'open':>4s} "
          f"{'short':>5s} {'gens':>4s} {'ms':>6s}  clean")
    clean = 0
    cells = generate_library(args.library_seed)
    for cell in cells:
        report, _result, _grid = run_pipeline(cell.netlist, tech,
                                              f"{args.seed}/{cell.name}", opts)
        clean += report["clean"]
        print(f"{cell.name:10s} {report['width']:5d} {cell.width_bound:5d} "
              f"{report['drc_count']:4d} {report['opens']:4d} {report['shorts']:5d} "
              f"{report['generations']:4d} {report['runtime_ms']:6d}  "
              f"{'yes' if report['clean'] else 'NO'}")
    print(f"\nclean: {clean}/{len(cells)}")
    return 0 if clean == len(cells) else 1


if __name__ == "__main__":
    sys.exit(main())
