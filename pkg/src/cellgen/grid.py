"""Layered on-track occupancy grid and its construction from a placement.

Layer model (tracks x columns, net id per cell; 0 empty, -1 blocked):

  DIFF  device-row terminals at even columns; no lateral conduction
  POLY  gate columns; the strip conducts vertically when the slot's gates
        carry one net, otherwise it degenerates to per-row stubs
  LISD  vertical local interconnect, via to DIFF below and M1 above
  LIG   horizontal local interconnect, via to POLY below and M1 above
  M1    horizontal metal (cut metal inferred by the DRC engine)
  M2    vertical metal, via to M1

PMOS terminals live on track 0, NMOS on the bottom track, pins are M1
points spread over the middle tracks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WidthOverflowError
from .netlist import Netlist
from .placement import RealizedPlacement, gate_col, routing_width
from .tech import TechParams

LAYERS = ("DIFF", "POLY", "LISD", "LIG", "M1", "M2")
HORIZONTAL = frozenset({"M1", "LIG"})
VERTICAL = frozenset({"M2", "LISD", "POLY"})
ROUTABLE = frozenset({"LISD", "LIG", "M1", "M2"})
# stack-adjacent pairs; a via exists where both are occupied by one net
VIA_PAIRS = (("DIFF", "LISD"), ("POLY", "LIG"), ("LISD", "M1"),
             ("LIG", "M1"), ("M1", "M2"))
VIA_NEIGHBORS = {}
for _a, _b in VIA_PAIRS:
    VIA_NEIGHBORS.setdefault(_a, []).append(_b)
    VIA_NEIGHBORS.setdefault(_b, []).append(_a)

EMPTY = 0
BLOCKED = -1


@dataclass
class LayoutGrid:
    height: int
    width: int                               # W^M1
    layers: dict                             # name -> int16 [height, width]
    cuts: set = field(default_factory=set)   # {(track, col)} on M1
    net_names: list = field(default_factory=list)   # id-1 -> name
    net_terminals: dict = field(default_factory=dict)  # net id -> [(layer, t, c)]
    pin_points: dict = field(default_factory=dict)     # pin name -> (t, c)

    def net_id(self, name: str) -> int:
        return self.net_names.index(name) + 1

    def net_name(self, nid: int) -> str:
        return self.net_names[nid - 1]

    def copy(self) -> "LayoutGrid":
        return LayoutGrid(
            self.height, self.width,
            {name: arr.copy() for name, arr in self.layers.items()},
            set(self.cuts), list(self.net_names),
            {k: list(v) for k, v in self.net_terminals.items()},
            dict(self.pin_points))

    def in_bounds(self, t: int, c: int) -> bool:
        return 0 <= t < self.height and 0 <= c < self.width

    def at(self, layer: str, t: int, c: int) -> int:
        return int(self.layers[layer][t, c])

    def mark(self, points, net: int) -> None:
        for layer, t, c in points:
            self.layers[layer][t, c] = net

    def unmark(self, points) -> None:
        for layer, t, c in points:
            self.layers[layer][t, c] = EMPTY


def grids_equal(a: LayoutGrid, b: LayoutGrid) -> bool:
    if (a.height, a.width) != (b.height, b.width):
        return False
    if any(not np.array_equal(a.layers[name], b.layers[name]) for name in LAYERS):
        return False
    return (a.cuts == b.cuts and a.net_names == b.net_names
            and {k: sorted(v) for k, v in a.net_terminals.items()}
            == {k: sorted(v) for k, v in b.net_terminals.items()}
            and a.pin_points == b.pin_points)


def empty_grid(height: int, width: int, net_names=()) -> LayoutGrid:
    layers = {name: np.zeros((height, width), dtype=np.int16) for name in LAYERS}
    return LayoutGrid(height, width, layers, net_names=list(net_names))


def _pin_tracks(height: int) -> list[int]:
    """Middle-out track order used to spread pins."""
    mid = height // 2
    order = [mid]
    for d in range(1, height):
        for t in (mid - d, mid + d):
            if 0 < t < height - 1:
                order.append(t)
    return order


def _extensible(m1, width: int, net: int, t: int, c: int) -> bool:
    """A pin segment must be able to grow to min length: some horizontal
    neighbour is empty and bordered only by this net."""
    for c1, c2 in ((c - 1, c - 2), (c + 1, c + 2)):
        if not (0 <= c1 < width) or m1[t, c1] != EMPTY:
            continue
        beyond = m1[t, c2] if 0 <= c2 < width else EMPTY
        if beyond in (EMPTY, net):
            return True
    return False


def _place_pin(grid: LayoutGrid, net: int, desired_col: int, tracks: list[int]):
    """First legal M1 cell probing outward from the desired column."""
    m1 = grid.layers["M1"]
    for require_room in (True, False):
        for t in tracks:
            for delta in range(grid.width):
                for c in ((desired_col + delta), (desired_col - delta)) if delta else (desired_col,):
                    if not (0 <= c < grid.width) or m1[t, c] != EMPTY:
                        continue
                    left = m1[t, c - 1] if c > 0 else EMPTY
                    right = m1[t, c + 1] if c + 1 < grid.width else EMPTY
                    if (left not in (EMPTY, net)) or (right not in (EMPTY, net)):
                        continue
                    if require_room and not _extensible(m1, grid.width, net, t, c):
                        continue
                    return t, c
    return None


def build_grid(realized: RealizedPlacement, netlist: Netlist, tech: TechParams) -> LayoutGrid:
    """Deterministic routing grid for a realized placement."""
    if realized.width > tech.max_width:
        raise WidthOverflowError(
            f"width {realized.width} exceeds max_width {tech.max_width}")
    h = tech.grid_height
    w = routing_width(realized.width)
    grid = empty_grid(h, w, net_names=netlist.nets)
    top, bottom = 0, h - 1
    poly, diff, lisd = grid.layers["POLY"], grid.layers["DIFF"], grid.layers["LISD"]

    def add_terminal(net_name, layer, t, c):
        nid = grid.net_id(net_name)
        pts = grid.net_terminals.setdefault(nid, [])
        if (layer, t, c) not in pts:
            pts.append((layer, t, c))

    # gate poly: one strip per occupied slot column
    by_col: dict = {}
    for (dev_name, term), (track, col) in realized.terminal_positions.items():
        if term != "gate":
            continue
        dev = next(d for d in netlist.devices if d.name == dev_name)
        by_col.setdefault(col, []).append((track, dev.gate))
        add_terminal(dev.gate, "POLY", track, col)
    for col, entries in by_col.items():
        nets = {g for _, g in entries}
        if len(nets) == 1:
            poly[:, col] = grid.net_id(nets.pop())
        else:
            for track, g in entries:  # mismatched gates: disconnected stubs
                poly[track, col] = grid.net_id(g)

    # diffusion terminals with LISD access points
    for (dev_name, term), (track, col) in realized.terminal_positions.items():
        if term == "gate":
            continue
        dev = next(d for d in netlist.devices if d.name == dev_name)
        net = {"source": dev.source, "drain": dev.drain}[term]
        nid = grid.net_id(net)
        if diff[track, col] in (EMPTY, nid):
            diff[track, col] = nid
            lisd[track, col] = nid
        add_terminal(net, "DIFF", track, col)

    # pins: M1 labels spread over middle tracks near their slot column
    tracks = _pin_tracks(h)
    for i, pin in enumerate(netlist.pins):
        nid = grid.net_id(pin.net)
        rotated = tracks[i % len(tracks):] + tracks[:i % len(tracks)]
        spot = _place_pin(grid, nid, gate_col(realized.pin_cols[i]), rotated)
        if spot is None:
            raise WidthOverflowError(f"no legal M1 site for pin {pin.name}")
        t, c = spot
        grid.layers["M1"][t, c] = nid
        grid.pin_points[pin.name] = (t, c)
        add_terminal(pin.net, "M1", t, c)
    return grid
