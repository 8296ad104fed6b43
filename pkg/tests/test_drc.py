import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from cellgen.drc import (RULE_CUT_ADJACENT, RULE_CUT_SPACING, RULE_SEG_LEN,
                         RULE_SHORT, check_connectivity, check_drc, infer_cuts,
                         locality_radius)
from cellgen.tech import default_tech
from tests.conftest import grid_from_m1, merge_rows, random_m1_grid, seg


def test_cut_in_only_legal_slot(tech):
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(0, 3, 4, 2)))
    cuts, shorts = infer_cuts(g, tech)
    assert cuts == {(0, 2)} and shorts == []


def test_cut_avoids_adjacent_track_conflict():
    tech = default_tech().with_rules(min_cut_spacing=3, cut_adjacency_window=1)
    # track 1: [A . . B]; track 0 forces its cut at column 1
    g = grid_from_m1(merge_rows(seg(0, 0, 0, 1), seg(0, 2, 3, 2),
                                seg(1, 0, 0, 3), seg(1, 3, 3, 4)))
    cuts, _ = infer_cuts(g, tech)
    assert (0, 1) in cuts
    assert (1, 2) in cuts  # column 1 would conflict; column 2 is free


def test_abutting_nets_are_infeasible_short(tech):
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(0, 2, 3, 2)))
    cuts, shorts = infer_cuts(g, tech)
    assert cuts == set()
    assert [s.rule for s in shorts] == [RULE_SHORT]
    assert shorts[0].position == (0, 1) and shorts[0].extent == (0, 2)


def test_wide_gap_needs_no_cut(tech):
    # separation >= min_cut_spacing: separate shapes, no cut
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(0, 5, 6, 2)))
    cuts, shorts = infer_cuts(g, tech)
    assert cuts == set() and shorts == []


def test_empty_grid_clean(tech):
    assert check_drc(grid_from_m1({}), tech) == []


def test_adjacent_track_cut_marker():
    tech = default_tech().with_rules(min_cut_spacing=3, cut_adjacency_window=1)
    g = grid_from_m1(merge_rows(
        seg(0, 0, 1, 1), seg(0, 3, 4, 2),
        seg(1, 0, 1, 3), seg(1, 3, 4, 4)))
    markers = check_drc(g, tech)
    assert [m.rule for m in markers] == [RULE_CUT_ADJACENT]
    assert markers[0].position == (0, 2) and markers[0].extent == (1, 2)


def test_short_segment_marker(tech):
    g = grid_from_m1(seg(2, 5, 5, 1), height=6, width=10)
    markers = check_drc(g, tech)
    assert [m.rule for m in markers] == [RULE_SEG_LEN]
    assert markers[0].position == (2, 5)


def test_cut_spacing_marker():
    tech = default_tech().with_rules(min_cut_spacing=3, min_segment_len=1)
    g = grid_from_m1(merge_rows(seg(0, 0, 0, 1), seg(0, 2, 2, 2),
                                seg(0, 4, 4, 3)), width=6)
    markers = check_drc(g, tech)
    assert [m.rule for m in markers] == [RULE_CUT_SPACING]
    assert markers[0].position == (0, 1) and markers[0].extent == (0, 3)


def test_markers_invariant_under_net_renaming(tech):
    rows = merge_rows(seg(0, 0, 1, 1), seg(0, 3, 4, 2), seg(1, 2, 3, 3))
    g1 = grid_from_m1(rows)
    swapped = {t: {c: {1: 2, 2: 1}.get(v, v) for c, v in cols.items()}
               for t, cols in rows.items()}
    g2 = grid_from_m1(swapped)
    assert check_drc(g1, tech) == check_drc(g2, tech)


def test_infer_cuts_idempotent(tech):
    rng = random.Random(7)
    for _ in range(25):
        g = random_m1_grid(rng)
        first = infer_cuts(g, tech)
        assert infer_cuts(g, tech) == first


def test_single_net_no_markers(tech):
    g = grid_from_m1(merge_rows(seg(0, 0, 5, 1), seg(1, 0, 5, 1),
                                seg(3, 2, 4, 1)), width=6)
    assert check_drc(g, tech) == []


def test_connectivity_open(tech):
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(2, 4, 5, 1)), width=8)
    g.net_terminals[1] = [("M1", 0, 0), ("M1", 2, 5)]
    assert check_connectivity(g, None) == [("n1", "open")]


def test_connectivity_short_single_report(tech):
    # nets 1 and 2 joined by abutting metal: one short entry
    g = grid_from_m1(merge_rows(seg(0, 0, 2, 1), seg(0, 3, 5, 2)), width=8)
    g.net_terminals[1] = [("M1", 0, 0)]
    g.net_terminals[2] = [("M1", 0, 5)]
    assert check_connectivity(g, None) == [("n1+n2", "short")]


def test_connectivity_clean_routed_inverter(inv, tech):
    from cellgen.ga import evolve
    from cellgen.placement import initial_rep, realize_placement
    r = realize_placement(initial_rep(inv), inv, tech)
    result = evolve(inv, r, 5, 4, "conn-test", tech)
    assert result.clean
    assert check_connectivity(result.best.overlay(), inv) == []


def _marker_cells(markers):
    cells = set()
    for m in markers:
        cells.add(m.position)
        if m.extent is not None:
            cells.add(m.extent)
    return cells


def test_locality_unit(tech):
    dt, dc = locality_radius(tech.drc_rules)
    rng = random.Random(3)
    for _ in range(60):
        g = random_m1_grid(rng, height=6, width=14)
        before = set(check_drc(g, tech))
        m1 = g.layers["M1"]
        empties = [(t, c) for t in range(g.height) for c in range(g.width)
                   if m1[t, c] == 0]
        if not empties:
            continue
        t, c = empties[rng.randrange(len(empties))]
        nets = [v for v in (m1[t, c - 1] if c else 0, m1[t, c + 1] if c + 1 < g.width else 0)
                if v > 0]
        m1[t, c] = nets[0] if nets else 1
        after = set(check_drc(g, tech))
        for m in before ^ after:
            for mt, mc in ({m.position} | ({m.extent} if m.extent else set())):
                assert abs(mt - t) <= dt and abs(mc - c) <= dc
