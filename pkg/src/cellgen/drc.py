"""Cut-metal inference over M1, rule checking, and connectivity.

Cut model: a maximal empty interval between two different-net M1 segments
on one track needs exactly one cut when the gap is shorter than
min_cut_spacing (wider gaps are separate shapes and need none; a zero gap
is a short). Cut positions are chosen in two phases so the choice stays
local: every interval first gets a provisional position (leftmost cell),
then each interval independently picks the cell minimizing conflicts
against the provisional positions of the other intervals, leftmost on
ties. There is no choice-to-choice feedback, which bounds how far a
single M1 edit can move markers (see locality_radius).
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import (BLOCKED, EMPTY, HORIZONTAL, LAYERS, VERTICAL,
                   VIA_NEIGHBORS, LayoutGrid)
from .netlist import Netlist
from .tech import TechParams

RULE_SHORT = "short"
RULE_CUT_SPACING = "cut_spacing"
RULE_CUT_ADJACENT = "cut_adjacent"
RULE_SEG_LEN = "m1_seg_len"


@dataclass(frozen=True, order=True)
class DrcMarker:
    rule: str
    position: tuple          # (track, col)
    extent: tuple | None = None

    def to_json(self) -> dict:
        d = {"rule": self.rule, "track": self.position[0], "col": self.position[1]}
        if self.extent is not None:
            d["track2"], d["col2"] = self.extent
        return d


def locality_radius(rules) -> tuple[int, int]:
    """(tracks, columns) box that bounds marker churn around one M1 edit."""
    return 2, 3 * rules.min_cut_spacing + rules.cut_adjacency_window


def _runs(row) -> list[tuple[int, int, int]]:
    """Maximal same-net runs on one M1 track as (start, end, net)."""
    runs = []
    c, w = 0, len(row)
    while c < w:
        v = int(row[c])
        if v > 0:
            start = c
            while c + 1 < w and int(row[c + 1]) == v:
                c += 1
            runs.append((start, c, v))
        c += 1
    return runs


def infer_cuts(grid: LayoutGrid, tech: TechParams):
    """Place cuts on M1; returns (cuts, shorts) with infeasible gaps as shorts."""
    spacing = tech.drc_rules.min_cut_spacing
    window = tech.drc_rules.cut_adjacency_window
    m1 = grid.layers["M1"]
    shorts: list[DrcMarker] = []
    intervals: list[tuple[int, int, int]] = []  # (track, lo, hi)
    for t in range(grid.height):
        row = m1[t]
        runs = _runs(row)
        for (s1, e1, n1), (s2, e2, n2) in zip(runs, runs[1:]):
            if n1 == n2:
                continue
            if any(int(row[c]) != EMPTY for c in range(e1 + 1, s2)):
                continue  # blockage between the segments, not an open interval
            gap = s2 - e1 - 1
            if gap == 0:
                shorts.append(DrcMarker(RULE_SHORT, (t, e1), (t, s2)))
            elif gap < spacing:
                intervals.append((t, e1 + 1, s2 - 1))

    provisional = [lo for _, lo, _ in intervals]

    def conflicts(i: int, pos: int) -> int:
        t = intervals[i][0]
        n = 0
        for j, (tj, _, _) in enumerate(intervals):
            if j == i:
                continue
            if tj == t and 0 < abs(pos - provisional[j]) < spacing:
                n += 1
            elif abs(tj - t) == 1 and abs(pos - provisional[j]) < window:
                n += 1
        return n

    cuts = set()
    for i, (t, lo, hi) in enumerate(intervals):
        best = min(range(lo, hi + 1), key=lambda pos: (conflicts(i, pos), pos))
        cuts.add((t, best))
    return cuts, shorts


def check_drc(grid: LayoutGrid, tech: TechParams) -> list[DrcMarker]:
    """All markers, deterministic and sorted; refreshes grid.cuts."""
    rules = tech.drc_rules
    cuts, markers = infer_cuts(grid, tech)
    grid.cuts = set(cuts)
    markers = list(markers)

    by_track: dict = {}
    for t, c in cuts:
        by_track.setdefault(t, []).append(c)
    for t, cols in by_track.items():
        cols.sort()
        for a, b in zip(cols, cols[1:]):
            if b - a < rules.min_cut_spacing:
                markers.append(DrcMarker(RULE_CUT_SPACING, (t, a), (t, b)))
    for t, c in sorted(cuts):
        for c2 in by_track.get(t + 1, ()):
            if abs(c2 - c) < rules.cut_adjacency_window:
                markers.append(DrcMarker(RULE_CUT_ADJACENT, (t, c), (t + 1, c2)))

    m1 = grid.layers["M1"]
    for t in range(grid.height):
        for s, e, _net in _runs(m1[t]):
            if e - s + 1 < rules.min_segment_len:
                markers.append(DrcMarker(RULE_SEG_LEN, (t, s), (t, e)))

    # direction-wise abutment shorts on the remaining routing layers
    for layer, vertical in (("LIG", False), ("LISD", True), ("M2", True)):
        arr = grid.layers[layer]
        for t in range(grid.height):
            for c in range(grid.width):
                v = int(arr[t, c])
                if v <= 0:
                    continue
                t2, c2 = (t + 1, c) if vertical else (t, c + 1)
                if t2 < grid.height and c2 < grid.width:
                    v2 = int(arr[t2, c2])
                    if v2 > 0 and v2 != v:
                        markers.append(DrcMarker(RULE_SHORT, (t, c), (t2, c2)))

    markers.sort(key=lambda m: (m.position, m.rule, m.extent or (-1, -1)))
    return markers


class _DSU:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent
        while p.setdefault(x, x) != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _occupancy_dsu(grid: LayoutGrid, same_net_only: bool) -> _DSU:
    dsu = _DSU()
    h, w = grid.height, grid.width
    for layer in LAYERS:
        arr = grid.layers[layer]
        lateral = None
        if layer in HORIZONTAL:
            lateral = (0, 1)
        elif layer in VERTICAL:
            lateral = (1, 0)
        for t in range(h):
            for c in range(w):
                v = int(arr[t, c])
                if v <= 0:
                    continue
                node = (layer, t, c)
                dsu.find(node)
                if lateral:
                    t2, c2 = t + lateral[0], c + lateral[1]
                    if t2 < h and c2 < w:
                        v2 = int(arr[t2, c2])
                        if v2 > 0 and (v2 == v or not same_net_only):
                            dsu.union(node, (layer, t2, c2))
                for other in VIA_NEIGHBORS[layer]:
                    if LAYERS.index(other) > LAYERS.index(layer):
                        v2 = int(grid.layers[other][t, c])
                        if v2 > 0 and v2 == v:
                            dsu.union(node, (other, t, c))
    return dsu


def same_net_dsu(grid: LayoutGrid) -> _DSU:
    """Electrical components: metal adjacency within layers plus same-net vias."""
    return _occupancy_dsu(grid, same_net_only=True)


def points_connected(grid: LayoutGrid, a, b, dsu: _DSU | None = None) -> bool:
    dsu = dsu or same_net_dsu(grid)
    return dsu.find(tuple(a)) == dsu.find(tuple(b))


def check_connectivity(grid: LayoutGrid, netlist: Netlist) -> list[tuple[str, str]]:
    """Opens (net terminals in >1 component) and shorts (two nets share one)."""
    dsu = _occupancy_dsu(grid, same_net_only=False)
    problems = set()
    for nid, points in grid.net_terminals.items():
        name = grid.net_name(nid)
        roots = set()
        for layer, t, c in points:
            if int(grid.layers[layer][t, c]) == nid:
                roots.add(dsu.find((layer, t, c)))
            else:
                roots.add(("missing", layer, t, c))
        if len(roots) > 1:
            problems.add((name, "open"))
    members: dict = {}
    for node in list(dsu.parent):
        layer, t, c = node
        members.setdefault(dsu.find(node), set()).add(int(grid.layers[layer][t, c]))
    for nets in members.values():
        nets.discard(EMPTY)
        nets.discard(BLOCKED)
        if len(nets) > 1:  # one report per shorted component
            problems.add(("+".join(sorted(grid.net_name(n) for n in nets)), "short"))
    return sorted(problems)
