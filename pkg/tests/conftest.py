import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cellgen.grid import empty_grid
from cellgen.library import load_hand_cell
from cellgen.netlist import Device, Pin, make_netlist
from cellgen.tech import default_tech


@pytest.fixture
def tech():
    return default_tech()


@pytest.fixture
def inv():
    return load_hand_cell("inv")


@pytest.fixture
def nand2():
    return load_hand_cell("nand2")


@pytest.fixture
def two_pair_sharing():
    """Two PMOS/NMOS pairs whose abutting terminals share a net on both rows."""
    return make_netlist(
        "share2",
        [Device("P0", "PMOS", 1, "A", "VDD", "Y"), Device("P1", "PMOS", 1, "B", "Y", "VDD"),
         Device("N0", "NMOS", 1, "A", "VSS", "Y"), Device("N1", "NMOS", 1, "B", "Y", "VSS")],
        [Pin("A", "A"), Pin("Y", "Y")])


def grid_from_m1(rows, height=None, width=None, nets=None):
    """Small grid builder: rows maps track -> {col: net id}."""
    h = height or (max(rows) + 1 if rows else 4)
    w = width or (1 + max((c for cols in rows.values() for c in cols), default=3))
    n_nets = nets or max((v for cols in rows.values() for v in cols.values()), default=1)
    g = empty_grid(max(h, 4), max(w, 2), [f"n{i}" for i in range(1, n_nets + 1)])
    for t, cols in rows.items():
        for c, v in cols.items():
            g.layers["M1"][t, c] = v
    return g


def seg(track, start, end, net):
    return {track: {c: net for c in range(start, end + 1)}}


def merge_rows(*parts):
    out = {}
    for p in parts:
        for t, cols in p.items():
            out.setdefault(t, {}).update(cols)
    return out


@pytest.fixture
def m1_grid():
    return grid_from_m1


def random_m1_grid(rng: random.Random, height=6, width=12, n_nets=4,
                   max_segments=7, min_seg=2):
    """Random multi-net M1 layout with no different-net abutments."""
    g = empty_grid(height, width, [f"n{i}" for i in range(1, n_nets + 1)])
    m1 = g.layers["M1"]
    for _ in range(rng.randint(2, max_segments)):
        t = rng.randrange(height)
        length = rng.randint(min_seg, max(min_seg, width // 3))
        c0 = rng.randrange(0, width - length + 1)
        net = rng.randint(1, n_nets)
        span = range(max(0, c0 - 1), min(width, c0 + length + 1))
        nearby = {int(m1[t, c]) for c in span} - {0}
        if nearby - {net}:
            continue
        for c in range(c0, c0 + length):
            m1[t, c] = net
    return g
