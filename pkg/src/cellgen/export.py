"""Layout export: SVG rendering and a replayable line-oriented script.

The script is a plain statement-per-shape format (not Cadence Skill):
replaying the statements reconstructs the LayoutGrid exactly, including
cuts, pin labels and terminal records.
"""

from __future__ import annotations

from .drc import DrcMarker, check_drc, infer_cuts
from .errors import CellgenError
from .grid import BLOCKED, EMPTY, HORIZONTAL, LAYERS, LayoutGrid, empty_grid

SCRIPT_VERSION = 1

LAYER_COLORS = {
    "DIFF": "#2e8b57", "POLY": "#cc4444", "LISD": "#7a5cc4",
    "LIG": "#b8860b", "M1": "#1f77b4", "M2": "#e377c2",
}
CELL = 20  # svg pixels per grid cell


def _rects(grid: LayoutGrid, layer: str):
    """Maximal same-net runs as (t0, c0, t1, c1, net), run along the layer
    direction (horizontal layers by track, others by column)."""
    arr = grid.layers[layer]
    rects = []
    if layer in HORIZONTAL:
        for t in range(grid.height):
            c = 0
            while c < grid.width:
                v = int(arr[t, c])
                if v != EMPTY:
                    start = c
                    while c + 1 < grid.width and int(arr[t, c + 1]) == v:
                        c += 1
                    rects.append((t, start, t, c, v))
                c += 1
    else:
        for c in range(grid.width):
            t = 0
            while t < grid.height:
                v = int(arr[t, c])
                if v != EMPTY:
                    start = t
                    while t + 1 < grid.height and int(arr[t + 1, c]) == v:
                        t += 1
                    rects.append((start, c, t, c, v))
                t += 1
    return rects


def export_script(grid: LayoutGrid) -> str:
    """Deterministic statement list; import_script() inverts it exactly."""
    lines = [f"version {SCRIPT_VERSION}", f"grid {grid.height} {grid.width}"]
    for i, name in enumerate(grid.net_names, start=1):
        lines.append(f"net {i} {name}")
    for layer in LAYERS:
        for t0, c0, t1, c1, v in _rects(grid, layer):
            label = grid.net_name(v) if v > 0 else "@blocked"
            lines.append(f"rect {layer} {t0} {c0} {t1} {c1} {label}")
    for t, c in sorted(grid.cuts):
        lines.append(f"cut {t} {c}")
    for pin, (t, c) in sorted(grid.pin_points.items()):
        lines.append(f"pin {pin} {t} {c}")
    for nid in sorted(grid.net_terminals):
        for layer, t, c in sorted(grid.net_terminals[nid]):
            lines.append(f"term {grid.net_name(nid)} {layer} {t} {c}")
    return "\n".join(lines) + "\n"


def import_script(text: str) -> LayoutGrid:
    grid = None
    nets: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "version":
                if int(tok[1]) != SCRIPT_VERSION:
                    raise CellgenError(f"unsupported script version {tok[1]}")
            elif tok[0] == "grid":
                grid = empty_grid(int(tok[1]), int(tok[2]))
            elif tok[0] == "net":
                nets[tok[2]] = int(tok[1])
                grid.net_names.append(tok[2])
            elif tok[0] == "rect":
                layer, t0, c0, t1, c1, label = tok[1], *map(int, tok[2:6]), tok[6]
                value = BLOCKED if label == "@blocked" else nets[label]
                grid.layers[layer][t0:t1 + 1, c0:c1 + 1] = value
            elif tok[0] == "cut":
                grid.cuts.add((int(tok[1]), int(tok[2])))
            elif tok[0] == "pin":
                grid.pin_points[tok[1]] = (int(tok[2]), int(tok[3]))
            elif tok[0] == "term":
                nid = nets[tok[1]]
                grid.net_terminals.setdefault(nid, []).append(
                    (tok[2], int(tok[3]), int(tok[4])))
            else:
                raise CellgenError(f"unknown statement {tok[0]!r}")
        except (IndexError, ValueError, KeyError) as e:
            raise CellgenError(f"script line {lineno}: {e!r}") from e
    if grid is None:
        raise CellgenError("script has no grid statement")
    return grid


def export_svg(grid: LayoutGrid, markers: list[DrcMarker] | None = None,
               tech=None) -> str:
    """One group per layer, dashed cut marks, red DRC overlays."""
    if markers is None and tech is not None:
        markers = check_drc(grid.copy(), tech)
    cuts = grid.cuts
    if not cuts and tech is not None:
        cuts, _shorts = infer_cuts(grid, tech)
    w_px, h_px = (grid.width + 2) * CELL, (grid.height + 2) * CELL

    def box(t, c, pad=3):
        return (f'x="{(c + 1) * CELL + pad}" y="{(t + 1) * CELL + pad}" '
                f'width="{CELL - 2 * pad}" height="{CELL - 2 * pad}"')

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" height="{h_px}" '
           f'viewBox="0 0 {w_px} {h_px}">',
           f'<rect x="0" y="0" width="{w_px}" height="{h_px}" fill="#fafafa"/>',
           '<g id="ruler" stroke="#dddddd" stroke-width="1">']
    for t in range(grid.height):
        y = (t + 1.5) * CELL
        out.append(f'<line x1="{CELL}" y1="{y}" x2="{w_px - CELL}" y2="{y}"/>')
    out.append("</g>")
    for layer in LAYERS:
        color = LAYER_COLORS[layer]
        out.append(f'<g id="{layer}" fill="{color}" fill-opacity="0.55">')
        for t0, c0, t1, c1, v in _rects(grid, layer):
            x, y = (c0 + 1) * CELL + 4, (t0 + 1) * CELL + 4
            out.append(f'<rect x="{x}" y="{y}" width="{(c1 - c0 + 1) * CELL - 8}" '
                       f'height="{(t1 - t0 + 1) * CELL - 8}">'
                       f'<title>{layer} {grid.net_name(v) if v > 0 else "blocked"}</title></rect>')
        out.append("</g>")
    out.append('<g id="cuts" stroke="#222222" stroke-width="2" stroke-dasharray="3,2">')
    for t, c in sorted(cuts):
        x, y = (c + 1.5) * CELL, (t + 1) * CELL
        out.append(f'<line x1="{x}" y1="{y + 3}" x2="{x}" y2="{y + CELL - 3}"/>')
    out.append("</g>")
    out.append('<g id="drc" fill="none" stroke="#ff0000" stroke-width="2">')
    for m in markers or []:
        out.append(f'<rect {box(*m.position, pad=1)}><title>{m.rule}</title></rect>')
        if m.extent is not None:
            out.append(f'<rect {box(*m.extent, pad=1)}/>')
    out.append("</g></svg>")
    return "\n".join(out) + "\n"
