"""Synthetic cell library: hand-written cells shipped as JSON plus seeded
random CMOS stacks. Width bounds for small cells come from the exhaustive
oracle; larger cells carry observed-good bounds."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources

from .netlist import Device, Netlist, Pin, make_netlist, parse_netlist

HAND_CELLS = ("inv", "nand2", "nor2", "aoi21", "oai21", "mux2", "xor2", "latch")

# minimum width for cells with <= 6 devices (exhaustive oracle); for the
# larger two, the best width seen across seeded annealing runs
WIDTH_BOUNDS = {"inv": 1, "nand2": 2, "nor2": 2, "aoi21": 3, "oai21": 3,
                "mux2": 4, "xor2": 6, "latch": 6}


@dataclass(frozen=True)
class FixtureCell:
    name: str
    netlist: Netlist
    width_bound: int
    expected_label: str = "routable"

    @property
    def oracle_checkable(self) -> bool:
        return len(self.netlist.devices) <= 6


def load_hand_cell(name: str) -> Netlist:
    text = resources.files("cellgen").joinpath(f"library/v1/{name}.json").read_text()
    return parse_netlist(text, "json")


def random_cell(seed: int, index: int) -> Netlist:
    """Seeded CMOS stack of 3-8 devices: per-row series chains with random
    parallel doublings over a small input pool."""
    rng = random.Random(f"cell/{seed}/{index}")
    n_p = rng.randint(2, 4)
    n_n = rng.randint(max(2, n_p - 1), 4)
    inputs = [f"I{k}" for k in range(rng.randint(2, 3))]
    devices = []

    def build_row(kind, prefix, rail, count):
        # chain rail -> x0 -> ... -> Y with `links` stages; every stage gets
        # at least one device, extras go in parallel
        links = rng.randint(1, count)
        per_link = [1] * links
        for _ in range(count - links):
            per_link[rng.randrange(links)] += 1
        nets = [rail] + [f"{prefix}{i}" for i in range(links - 1)] + ["Y"]
        k = 0
        for stage, group in enumerate(per_link):
            for _ in range(group):
                devices.append(Device(f"M{kind[0]}{k}", kind, rng.choice((1, 1, 1, 2)),
                                      rng.choice(inputs), nets[stage], nets[stage + 1]))
                k += 1

    build_row("PMOS", "p", "VDD", n_p)
    build_row("NMOS", "n", "VSS", n_n)
    used_inputs = sorted({d.gate for d in devices})
    pins = [Pin(net, net) for net in used_inputs] + [Pin("Y", "Y")]
    return make_netlist(f"rnd{index:02d}", devices, pins)


def generate_library(seed: int = 1, random_cells: int = 12) -> list[FixtureCell]:
    """~20 deterministic cells: the hand set plus seeded random stacks."""
    cells = [FixtureCell(name, load_hand_cell(name), WIDTH_BOUNDS[name])
             for name in HAND_CELLS]
    for i in range(random_cells):
        nl = random_cell(seed, i)
        bound = max(len(nl.pmos), len(nl.nmos)) * 2  # safe loose bound
        cells.append(FixtureCell(nl.name, nl, bound))
    return cells


def find_cell(name: str, seed: int = 1) -> Netlist:
    if name in HAND_CELLS:
        return load_hand_cell(name)
    for cell in generate_library(seed):
        if cell.name == name:
            return cell.netlist
    raise KeyError(f"unknown library cell {name!r}")
