"""Netlists: devices, pins, and the JSON / SPICE-subset parsers.

SPICE subset: `M<name> <drain> <gate> <source> <bulk> <pmos|nmos> [nfin=<k>]`
cards, optional `.subckt <cell> <ports...>` / `.ends` wrapper (ports become
cell pins), `*` comments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NetlistError
from .tech import FINS_MAX

PMOS = "PMOS"
NMOS = "NMOS"


@dataclass(frozen=True)
class Device:
    name: str
    kind: str  # PMOS | NMOS
    fins: int
    gate: str
    source: str
    drain: str

    def left_net(self, flipped: bool) -> str:
        """Net on the left diffusion edge; source sits left when unflipped."""
        return self.drain if flipped else self.source

    def right_net(self, flipped: bool) -> str:
        return self.source if flipped else self.drain


@dataclass(frozen=True)
class Pin:
    name: str
    net: str


@dataclass(frozen=True)
class Netlist:
    name: str
    devices: tuple[Device, ...]
    pins: tuple[Pin, ...]

    @property
    def pmos(self) -> list[Device]:
        return [d for d in self.devices if d.kind == PMOS]

    @property
    def nmos(self) -> list[Device]:
        return [d for d in self.devices if d.kind == NMOS]

    @property
    def nets(self) -> list[str]:
        """All nets, sorted; derived from device terminals and pins."""
        seen = set()
        for d in self.devices:
            seen.update((d.gate, d.source, d.drain))
        seen.update(p.net for p in self.pins)
        return sorted(seen)

    def net_degree(self, net: str) -> int:
        """Number of device-terminal and pin attachments of a net."""
        n = sum((d.gate == net) + (d.source == net) + (d.drain == net) for d in self.devices)
        return n + sum(p.net == net for p in self.pins)


def make_netlist(name, devices, pins) -> Netlist:
    """Validate and build a Netlist; raises NetlistError on bad input."""
    devices = tuple(devices)
    pins = tuple(pins)
    names = [d.name for d in devices]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise NetlistError(f"duplicate device names: {', '.join(dup)}")
    pin_names = [p.name for p in pins]
    if len(set(pin_names)) != len(pin_names):
        raise NetlistError("duplicate pin names")
    kinds = {d.kind for d in devices}
    if PMOS not in kinds or NMOS not in kinds:
        raise NetlistError("netlist needs at least one PMOS and one NMOS device")
    for d in devices:
        if d.kind not in (PMOS, NMOS):
            raise NetlistError(f"device {d.name}: unknown kind {d.kind!r}")
        if not (1 <= d.fins <= FINS_MAX):
            raise NetlistError(f"device {d.name}: fins must be in [1, {FINS_MAX}]")
    terminal_nets = set()
    for d in devices:
        terminal_nets.update((d.gate, d.source, d.drain))
    for p in pins:
        if p.net not in terminal_nets:
            raise NetlistError(f"pin {p.name}: net {p.net!r} touches no device terminal")
    return Netlist(name, devices, pins)


def serialize_netlist(netlist: Netlist) -> dict:
    return {
        "format_version": 1,
        "name": netlist.name,
        "devices": [
            {"name": d.name, "kind": d.kind, "fins": d.fins,
             "gate": d.gate, "source": d.source, "drain": d.drain}
            for d in netlist.devices
        ],
        "pins": [{"name": p.name, "net": p.net} for p in netlist.pins],
    }


def _parse_json(text: str) -> Netlist:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError(f"invalid JSON: {e}", line=e.lineno) from e
    for key in ("name", "devices"):
        if key not in doc:
            raise NetlistError(f"missing top-level key {key!r}")
    devices = []
    for i, d in enumerate(doc["devices"]):
        try:
            devices.append(Device(
                name=d["name"], kind=d["kind"].upper(), fins=int(d.get("fins", 1)),
                gate=d["gate"], source=d["source"], drain=d["drain"]))
        except KeyError as e:
            raise NetlistError(f"device #{i}: missing field {e.args[0]!r}") from e
    pins = [Pin(p["name"], p["net"]) for p in doc.get("pins", [])]
    return make_netlist(doc["name"], devices, pins)


def _parse_spice(text: str) -> Netlist:
    name = "cell"
    devices = []
    ports: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        tokens = line.split()
        head = tokens[0].lower()
        if head == ".subckt":
            if len(tokens) < 2:
                raise NetlistError(".subckt needs a name", line=lineno)
            name = tokens[1]
            ports = tokens[2:]
        elif head in (".ends", ".end"):
            continue
        elif head.startswith(".pin"):
            raise NetlistError("unknown directive; declare pins via .subckt ports", line=lineno)
        elif tokens[0][0] in "Mm":
            if len(tokens) < 6:
                raise NetlistError("M-card needs: name drain gate source bulk model", line=lineno)
            dname, drain, gate, source, _bulk, model = tokens[:6]
            model = model.lower()
            if model not in ("pmos", "nmos"):
                raise NetlistError(f"unknown device kind {model!r}", line=lineno)
            fins = 1
            for extra in tokens[6:]:
                if extra.lower().startswith("nfin="):
                    try:
                        fins = int(extra.split("=", 1)[1])
                    except ValueError:
                        raise NetlistError(f"bad nfin value in {extra!r}", line=lineno) from None
                else:
                    raise NetlistError(f"unexpected token {extra!r}", line=lineno)
            devices.append(Device(dname, PMOS if model == "pmos" else NMOS,
                                  fins, gate, source, drain))
        else:
            raise NetlistError(f"unrecognised card {tokens[0]!r}", line=lineno)
    pins = [Pin(p, p) for p in ports]
    return make_netlist(name, devices, pins)


def parse_netlist(text: str, fmt: str = "json") -> Netlist:
    """Parse netlist text in `json` or `spice` format."""
    if fmt == "json":
        return _parse_json(text)
    if fmt == "spice":
        return _parse_spice(text)
    raise NetlistError(f"unknown netlist format {fmt!r}")


def load_netlist(path) -> Netlist:
    with open(path) as f:
        text = f.read()
    fmt = "spice" if str(path).endswith((".sp", ".spi", ".cir")) else "json"
    return parse_netlist(text, fmt)
