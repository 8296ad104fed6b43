"""Placement representation and its left-to-right realization.

A representation holds per-slot device orders for both rows (with NULL
slots), per-device flip flags, and per-slot pin assignments. Realization
scans slots left to right; the column advance between adjacent slots is
1 plus a dummy-poly gap when fin counts mismatch or diffusion does not
share. Simultaneous violations take max(k_s, k_f), both rules being
"at least K" separations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import RepInvalidError
from .netlist import Netlist, Device
from .tech import TechParams


@dataclass(frozen=True)
class PlacementRep:
    order_p: tuple            # slot -> PMOS index | None
    order_n: tuple            # slot -> NMOS index | None
    flip_p: tuple             # per-PMOS flip flag
    flip_n: tuple             # per-NMOS flip flag
    pin_slots: tuple          # slot -> pin index | None

    @property
    def n_slots(self) -> int:
        return len(self.order_p)


@dataclass(frozen=True)
class RealizedPlacement:
    x_p: tuple                # per-PMOS poly column
    x_n: tuple                # per-NMOS poly column
    pin_cols: tuple           # per-pin poly column, clamped into [0, width)
    width: int                # poly columns occupied by devices
    slot_cols: tuple          # scan column of every slot
    terminal_positions: dict  # (device name, terminal) -> (track, routing col)


def default_slot_count(netlist: Netlist) -> int:
    """Device pairs plus ~25% slack for gaps; never fewer slots than pins."""
    base = max(len(netlist.pmos), len(netlist.nmos))
    return max(base + math.ceil(base / 4), len(netlist.pins))


def initial_rep(netlist: Netlist, n_slots: int | None = None) -> PlacementRep:
    """Deterministic start: netlist order, greedy gate-matched pairing, no flips."""
    pmos, nmos = netlist.pmos, netlist.nmos
    n = n_slots or default_slot_count(netlist)
    if n < max(len(pmos), len(nmos), len(netlist.pins)):
        raise RepInvalidError(f"{n} slots cannot hold all devices and pins")
    order_p: list = [None] * n
    order_n: list = [None] * n
    used_n: set[int] = set()
    slot = 0
    for ip, dev in enumerate(pmos):
        order_p[slot] = ip
        for j, nd in enumerate(nmos):
            if j not in used_n and nd.gate == dev.gate:
                order_n[slot] = j
                used_n.add(j)
                break
        slot += 1
    free = [k for k in range(n) if order_n[k] is None]
    rest = [j for j in range(len(nmos)) if j not in used_n]
    for k, j in zip(free, rest):
        order_n[k] = j
    pin_slots: list = [None] * n
    for i in range(len(netlist.pins)):
        pin_slots[i] = i
    return PlacementRep(tuple(order_p), tuple(order_n),
                        (False,) * len(pmos), (False,) * len(nmos),
                        tuple(pin_slots))


def validate_rep(rep: PlacementRep, netlist: Netlist) -> None:
    n = rep.n_slots
    np_, nn, npin = len(netlist.pmos), len(netlist.nmos), len(netlist.pins)
    if n < max(np_, nn):
        raise RepInvalidError(f"{n} slots < max device count {max(np_, nn)}")
    if len(rep.order_n) != n or len(rep.pin_slots) != n:
        raise RepInvalidError("order/pin lists must share the slot count")
    for label, order, count in (("order_p", rep.order_p, np_),
                                ("order_n", rep.order_n, nn),
                                ("pin_slots", rep.pin_slots, npin)):
        present = [v for v in order if v is not None]
        if sorted(present) != list(range(count)):
            raise RepInvalidError(f"{label} is not a permutation of 0..{count - 1} plus NULLs")
    if len(rep.flip_p) != np_ or len(rep.flip_n) != nn:
        raise RepInvalidError("flip flag lists must match device counts")


def _fin_mismatch(devs: list[Device], order, k: int) -> bool:
    a, b = order[k], order[k + 1]
    return a is not None and b is not None and devs[a].fins != devs[b].fins


def _no_share(devs: list[Device], order, flips, k: int) -> bool:
    a, b = order[k], order[k + 1]
    if a is None or b is None:
        return False
    return devs[a].right_net(flips[a]) != devs[b].left_net(flips[b])


def gate_col(poly_col: int) -> int:
    """Routing column of a poly gate; diffusion sits at 2c and 2c+2."""
    return 2 * poly_col + 1


def routing_width(width: int) -> int:
    """W^M1: two routing columns per poly column plus two boundary columns."""
    return 2 * width + 2


def realize_placement(rep: PlacementRep, netlist: Netlist, tech: TechParams) -> RealizedPlacement:
    """Scan slots left to right and assign poly columns under the gap rules."""
    validate_rep(rep, netlist)
    pmos, nmos = netlist.pmos, netlist.nmos
    n = rep.n_slots
    x = 0
    slot_cols = []
    x_p = [0] * len(pmos)
    x_n = [0] * len(nmos)
    for k in range(n):
        slot_cols.append(x)
        if rep.order_p[k] is not None:
            x_p[rep.order_p[k]] = x
        if rep.order_n[k] is not None:
            x_n[rep.order_n[k]] = x
        if k + 1 < n:
            gap = 0
            if _fin_mismatch(pmos, rep.order_p, k) or _fin_mismatch(nmos, rep.order_n, k):
                gap = tech.k_f
            if _no_share(pmos, rep.order_p, rep.flip_p, k) or _no_share(nmos, rep.order_n, rep.flip_n, k):
                gap = max(gap, tech.k_s)
            x += 1 + gap
    width = 1 + max(list(x_p) + list(x_n))
    pin_cols = [0] * len(netlist.pins)
    for k, pin in enumerate(rep.pin_slots):
        if pin is not None:
            pin_cols[pin] = min(max(slot_cols[k], 0), width - 1)

    top, bottom = 0, tech.grid_height - 1
    terms: dict = {}
    for devs, xs, flips, track in ((pmos, x_p, rep.flip_p, top), (nmos, x_n, rep.flip_n, bottom)):
        for i, dev in enumerate(devs):
            c = xs[i]
            left, right = 2 * c, 2 * c + 2
            src, drn = (right, left) if flips[i] else (left, right)
            terms[(dev.name, "gate")] = (track, gate_col(c))
            terms[(dev.name, "source")] = (track, src)
            terms[(dev.name, "drain")] = (track, drn)
    return RealizedPlacement(tuple(x_p), tuple(x_n), tuple(pin_cols),
                             width, tuple(slot_cols), terms)


def gate_violations(rep: PlacementRep, netlist: Netlist) -> int:
    """Slots pairing a PMOS and an NMOS whose gate nets differ."""
    validate_rep(rep, netlist)
    pmos, nmos = netlist.pmos, netlist.nmos
    count = 0
    for k in range(rep.n_slots):
        ip, inn = rep.order_p[k], rep.order_n[k]
        if ip is not None and inn is not None and pmos[ip].gate != nmos[inn].gate:
            count += 1
    return count


def rep_to_json(rep: PlacementRep) -> dict:
    return {
        "format_version": 1,
        "order_p": list(rep.order_p),
        "order_n": list(rep.order_n),
        "flip_p": list(rep.flip_p),
        "flip_n": list(rep.flip_n),
        "pin_slots": list(rep.pin_slots),
    }


def rep_from_json(d: dict) -> PlacementRep:
    return PlacementRep(tuple(d["order_p"]), tuple(d["order_n"]),
                        tuple(bool(v) for v in d["flip_p"]),
                        tuple(bool(v) for v in d["flip_n"]),
                        tuple(d["pin_slots"]))
