"""Terminal-pair decomposition and the randomized Lee-style maze router.

The wavefront is a Dijkstra expansion from the whole component containing
one endpoint, stopping at first touch of the other endpoint's component,
honoring per-layer directions (M1/LIG horizontal, M2/LISD vertical) with
unit metal steps, costlier local-interconnect steps, and a configurable
via cost. Distances are exact, so the route cost is always optimal; the
router's randomness is the uniform choice among equal-cost predecessors
during backtrace. Entry rules prune abutments against other nets and two
M1 patterns the fixer could never repair (unextendable via landings and
placements that box in another net's single-cell segment).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .grid import EMPTY, HORIZONTAL, ROUTABLE, VIA_NEIGHBORS, LayoutGrid
from .netlist import Netlist
from .placement import RealizedPlacement
from .tech import TechParams


@dataclass(frozen=True, order=True)
class TerminalPair:
    net: str
    a: tuple  # (layer, track, col)
    b: tuple

    def key(self):
        return (self.net, self.a, self.b)


@dataclass
class Route:
    pair: TerminalPair
    points: tuple   # full path, endpoints included
    added: tuple    # subset of points newly marked by this route

    def touches(self, t0, c0, t1, c1) -> bool:
        return any(t0 <= t <= t1 and c0 <= c <= c1 for _l, t, c in self.points)

    def side(self, vertical: bool, cut: int) -> str:
        """'left'/'right' of a cut line, or 'straddle'; empty paths count left."""
        if not self.points:
            return "left"
        vals = [c if vertical else t for _l, t, c in self.points]
        if all(v < cut for v in vals):
            return "left"
        if all(v >= cut for v in vals):
            return "right"
        return "straddle"


def _mst_pairs(net: str, points: list[tuple]) -> list[TerminalPair]:
    pts = sorted(set(points))
    if len(pts) < 2:
        return []
    edges = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = abs(pts[i][1] - pts[j][1]) + abs(pts[i][2] - pts[j][2])
            edges.append((d, pts[i], pts[j]))
    edges.sort()
    parent = {p: p for p in pts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs = []
    for _d, a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
            pairs.append(TerminalPair(net, a, b))
        if len(pairs) == len(pts) - 1:
            break
    return pairs


def terminal_pairs(netlist: Netlist, realized: RealizedPlacement,
                   grid: LayoutGrid) -> list[TerminalPair]:
    """Per net, a Manhattan-distance MST over its distinct terminal points."""
    pairs = []
    for nid in sorted(grid.net_terminals):
        pairs.extend(_mst_pairs(grid.net_name(nid), grid.net_terminals[nid]))
    return sorted(pairs)


def _stub_extensible(grid: LayoutGrid, t: int, c: int, net: int) -> bool:
    """A via landing at (t, c) must either join same-net M1 or leave room
    for the segment to reach legal length later; landings that would be
    permanently short are pruned here rather than left for the fixer."""
    m1 = grid.layers["M1"]
    for dc in (-1, 1):
        c1 = c + dc
        if 0 <= c1 < grid.width and int(m1[t, c1]) == net:
            return True
    for dc in (-1, 1):
        c1, c2 = c + dc, c + 2 * dc
        if not (0 <= c1 < grid.width) or int(m1[t, c1]) != EMPTY:
            continue
        far = int(m1[t, c2]) if 0 <= c2 < grid.width else EMPTY
        if far in (EMPTY, net):
            return True
    return False


def _boxes_short_segment(grid: LayoutGrid, t: int, c: int, net: int) -> bool:
    """Placing metal two cells from another net's single-cell segment seals
    its last legal extension; such placements are pruned like abutments."""
    m1 = grid.layers["M1"]
    w = grid.width

    def cell(col):
        return int(m1[t, col]) if 0 <= col < w else -2  # border acts occupied

    for dc in (-1, 1):
        victim = cell(c + 2 * dc)
        if victim <= 0 or victim == net:
            continue
        if cell(c + dc) != EMPTY or cell(c + 3 * dc) == victim:
            continue  # not a lone single-cell segment
        far_side = cell(c + 4 * dc)
        grows_away = cell(c + 3 * dc) == EMPTY and far_side in (EMPTY, victim, -2)
        if not grows_away:
            return True  # its only growth direction ran through our cell
    return False


def _enterable(grid: LayoutGrid, layer: str, t: int, c: int, net: int,
               via: bool = False):
    """(allowed, free) for the wavefront entering a cell with this net."""
    v = int(grid.layers[layer][t, c])
    if v == net:
        return True, False
    if v != EMPTY or layer not in ROUTABLE:
        return False, False
    # direction-wise abutment against another net is pruned here
    if layer in HORIZONTAL:
        nbors = ((t, c - 1), (t, c + 1))
    else:
        nbors = ((t - 1, c), (t + 1, c))
    arr = grid.layers[layer]
    for t2, c2 in nbors:
        if 0 <= t2 < grid.height and 0 <= c2 < grid.width:
            v2 = int(arr[t2, c2])
            if v2 > 0 and v2 != net:
                return False, False
    if layer == "M1":
        if via and not _stub_extensible(grid, t, c, net):
            return False, False
        if _boxes_short_segment(grid, t, c, net):
            return False, False
    return True, True


def _neighbors(grid: LayoutGrid, layer: str, t: int, c: int):
    if layer in HORIZONTAL:
        steps = ((layer, t, c - 1, False), (layer, t, c + 1, False))
    elif layer == "DIFF":
        steps = ()
    else:  # vertical layers, POLY included for same-net traversal
        steps = ((layer, t - 1, c, False), (layer, t + 1, c, False))
    for item in steps:
        if 0 <= item[1] < grid.height and 0 <= item[2] < grid.width:
            yield item
    for other in VIA_NEIGHBORS[layer]:
        yield other, t, c, True


def component_points(grid: LayoutGrid, start, net: int) -> set:
    """Same-net cells reachable from `start` through metal and vias."""
    layer, t, c = start
    if int(grid.layers[layer][t, c]) != net:
        return {tuple(start)}
    seen = {tuple(start)}
    stack = [tuple(start)]
    while stack:
        l0, t0, c0 = stack.pop()
        for l1, t1, c1, _via in _neighbors(grid, l0, t0, c0):
            p = (l1, t1, c1)
            if p not in seen and int(grid.layers[l1][t1, c1]) == net:
                seen.add(p)
                stack.append(p)
    return seen


def maze_route(grid: LayoutGrid, pair: TerminalPair, rng,
               tech: TechParams) -> Route | None:
    """Shortest route between the components of the pair's endpoints.

    Does not mutate the grid; the caller marks `route.added`. Returns None
    when no path exists.
    """
    net = grid.net_id(pair.net)
    sources = component_points(grid, pair.a, net)
    targets = component_points(grid, pair.b, net)
    if sources & targets:
        return Route(pair, (), ())

    dist = {}
    heap = []
    for p in sorted(sources):
        dist[p] = 0
        heapq.heappush(heap, (0, p))
    goal = None
    while heap:
        d, p = heapq.heappop(heap)
        if d > dist.get(p, -1):
            continue
        if p in targets:
            goal = p
            break
        l0, t0, c0 = p
        for l1, t1, c1, via in _neighbors(grid, l0, t0, c0):
            q = (l1, t1, c1)
            allowed, _free = _enterable(grid, l1, t1, c1, net, via=via)
            if not allowed:
                continue
            nd = d + _edge_cost(l1, via, tech)
            if nd < dist.get(q, nd + 1):
                dist[q] = nd
                heapq.heappush(heap, (nd, q))
    if goal is None:
        return None

    # backtrace, picking uniformly among predecessors on a shortest path
    path = [goal]
    p = goal
    while dist[p] > 0:
        l0, t0, c0 = p
        preds = []
        for l1, t1, c1, via in _neighbors(grid, l0, t0, c0):
            q = (l1, t1, c1)
            if (q in dist and dist[q] + _edge_cost(l0, via, tech) == dist[p]
                    and _enterable(grid, l0, t0, c0, net, via=via)[0]):
                preds.append(q)
        p = preds[rng.randrange(len(preds))] if len(preds) > 1 else preds[0]
        path.append(p)
    path.reverse()
    added = tuple(p for p in path if int(grid.layers[p[0]][p[1], p[2]]) == EMPTY)
    return Route(pair, tuple(path), added)


def _edge_cost(dest_layer: str, via: bool, tech: TechParams) -> int:
    if via:
        return tech.via_cost
    return tech.li_step_cost if dest_layer in ("LISD", "LIG") else tech.step_cost


def route_cost(route: Route, tech: TechParams) -> int:
    """Cost of a route under the shared step/via model (oracle comparisons)."""
    return sum(_edge_cost(l1, l1 != l0, tech)
               for (l0, _t0, _c0), (l1, _t1, _c1)
               in zip(route.points, route.points[1:]))
