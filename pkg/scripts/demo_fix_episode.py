#!/usr/bin/env python3
"""Route one cell with a random order, then watch the greedy agent fix the
remaining M1 violations step by step."""

import argparse
import random
import sys

from cellgen.drc import check_drc
from cellgen.fixenv import DrcFixEnv, default_fix_budget, greedy_fix_grid
from cellgen.ga import RoutingSolution, complete
from cellgen.grid import build_grid
from cellgen.library import find_cell
from cellgen.pipeline import place_with_restarts
from cellgen.placement import realize_placement
from cellgen.router import terminal_pairs
from cellgen.tech import load_tech


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cell", default="latch")
    ap.add_argument("--seed", default="demo")
    ap.add_argument("--config")
    args = ap.parse_args()

    tech = load_tech(args.config)
    netlist = find_cell(args.cell)
    sa = place_with_restarts(netlist, tech, 6000, 2, args.seed)
    realized = realize_placement(sa.rep, netlist, tech)
    grid = build_grid(realized, netlist, tech)
    pairs = tuple(terminal_pairs(netlist, realized, grid))
    sol = complete(RoutingSolution(grid, pairs), random.Random(args.seed), tech)
    overlay = sol.overlay()
    start = check_drc(overlay, tech)
    print(f"{args.cell}: width {realized.width}, {len(pairs)} pairs, "
          f"{len(start)} DRC markers after routing")
    for m in start:
        print(f"  {m.rule} at {m.position}" + (f" .. {m.extent}" if m.extent else ""))
    if not start:
        print("nothing to fix")
        return 0
    additions, remaining = greedy_fix_grid(overlay, tech, default_fix_budget(overlay))
    for i, (net, t, c) in enumerate(additions, 1):
        print(f"step {i}: extend net {overlay.net_name(net)} at track {t}, col {c}")
    print(f"remaining markers: {remaining}")
    return 0 if remaining == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
