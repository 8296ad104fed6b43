"""Brute-force placement enumeration, the width oracle for small cells."""

from __future__ import annotations

from itertools import permutations, product

from .netlist import Netlist
from .placement import PlacementRep, default_slot_count, realize_placement
from .tech import TechParams


def all_reps(netlist: Netlist, n_slots: int | None = None):
    """Every (arrangement, flip) representation; pins parked on leading slots."""
    n = n_slots or default_slot_count(netlist)
    n_p, n_n, n_pin = len(netlist.pmos), len(netlist.nmos), len(netlist.pins)
    pin_slots = tuple(range(n_pin)) + (None,) * (n - n_pin)
    for slots_p in permutations(range(n), n_p):
        order_p: list = [None] * n
        for dev, slot in enumerate(slots_p):
            order_p[slot] = dev
        for slots_n in permutations(range(n), n_n):
            order_n: list = [None] * n
            for dev, slot in enumerate(slots_n):
                order_n[slot] = dev
            for flips in product((False, True), repeat=n_p + n_n):
                yield PlacementRep(tuple(order_p), tuple(order_n),
                                   flips[:n_p], flips[n_p:], pin_slots)


def enumerate_min_width(netlist: Netlist, tech: TechParams,
                        n_slots: int | None = None):
    """(minimum width, a witness rep) over the full representation space."""
    best = None
    best_rep = None
    for rep in all_reps(netlist, n_slots):
        w = realize_placement(rep, netlist, tech).width
        if best is None or w < best:
            best, best_rep = w, rep
    return best, best_rep
