import numpy as np
import pytest

from cellgen.errors import WidthOverflowError
from cellgen.grid import EMPTY, build_grid, grids_equal
from cellgen.placement import initial_rep, realize_placement
from cellgen.tech import default_tech


def test_inverter_grid_width(inv, tech):
    r = realize_placement(initial_rep(inv), inv, tech)
    g = build_grid(r, inv, tech)
    assert g.width == 4 and g.height == tech.grid_height


def test_width3_grid(two_pair_sharing, tech):
    # force a width-3 realization by leaving a gap slot in the middle
    from tests.test_placement import rep_for
    rep = rep_for(two_pair_sharing, [0, None, 1], [0, None, 1])
    r = realize_placement(rep, two_pair_sharing, tech)
    assert r.width == 3
    assert build_grid(r, two_pair_sharing, tech).width == 8


def test_max_width_enforced(inv, tech):
    from dataclasses import replace
    tight = replace(tech, max_width=0)
    r = realize_placement(initial_rep(inv), inv, tech)
    with pytest.raises(WidthOverflowError):
        build_grid(r, inv, tight)


def test_build_grid_pure(nand2, tech):
    r = realize_placement(initial_rep(nand2), nand2, tech)
    a, b = build_grid(r, nand2, tech), build_grid(r, nand2, tech)
    assert grids_equal(a, b)


def test_poly_strip_spans_matched_gates(inv, tech):
    g = build_grid(realize_placement(initial_rep(inv), inv, tech), inv, tech)
    poly = g.layers["POLY"]
    a = g.net_id("A")
    assert all(poly[t, 1] == a for t in range(g.height))


def test_mismatched_gates_leave_stubs(tech):
    from cellgen.netlist import Device, make_netlist
    nl = make_netlist("mm", [Device("P", "PMOS", 1, "A", "S", "D"),
                             Device("N", "NMOS", 1, "B", "S2", "D2")], [])
    g = build_grid(realize_placement(initial_rep(nl), nl, tech), nl, tech)
    poly = g.layers["POLY"]
    assert poly[0, 1] == g.net_id("A")
    assert poly[g.height - 1, 1] == g.net_id("B")
    assert all(poly[t, 1] == EMPTY for t in range(1, g.height - 1))


def test_pins_on_m1_with_room_to_grow(nand2, tech):
    g = build_grid(realize_placement(initial_rep(nand2), nand2, tech), nand2, tech)
    m1 = g.layers["M1"]
    assert len(g.pin_points) == 3
    for name, (t, c) in g.pin_points.items():
        net = g.net_id(next(p.net for p in nand2.pins if p.name == name))
        assert m1[t, c] == net
        for dc in (-1, 1):  # no different-net abutment at build time
            if 0 <= c + dc < g.width:
                assert int(m1[t, c + dc]) in (EMPTY, net)


def test_shared_diffusion_is_one_point(two_pair_sharing, tech):
    from tests.test_placement import rep_for
    rep = rep_for(two_pair_sharing, [0, 1], [0, 1])
    r = realize_placement(rep, two_pair_sharing, tech)
    g = build_grid(r, two_pair_sharing, tech)
    y = g.net_id("Y")
    # P0 drain and P1 source are net Y at the same abutting column
    assert (int(g.layers["DIFF"][0, 2]) == y
            and ("DIFF", 0, 2) in g.net_terminals[y])
