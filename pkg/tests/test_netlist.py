import json

import pytest
from hypothesis import given, strategies as st

from cellgen.errors import NetlistError
from cellgen.netlist import (Device, Pin, make_netlist, parse_netlist,
                             serialize_netlist)


def test_inverter_json_fixture(inv):
    assert len(inv.pmos) == 1 and len(inv.nmos) == 1
    assert {p.name for p in inv.pins} == {"A", "Y"}


def test_spice_mcard_pmos_with_fins():
    nl = parse_netlist(
        ".subckt buf A Y\n"
        "M1 Y A VDD VDD pmos nfin=2\n"
        "M2 Y A VSS VSS nmos\n"
        ".ends\n", "spice")
    d = nl.devices[0]
    assert d.kind == "PMOS" and d.fins == 2 and d.gate == "A"
    assert d.drain == "Y" and d.source == "VDD"
    assert [p.name for p in nl.pins] == ["A", "Y"]


def test_unknown_device_kind_reports_line():
    with pytest.raises(NetlistError) as exc:
        parse_netlist("* comment\nM1 Y A VDD VDD cmos\n", "spice")
    assert "line 2" in str(exc.value)


def test_duplicate_device_names_rejected():
    with pytest.raises(NetlistError, match="duplicate"):
        make_netlist("x", [Device("M", "PMOS", 1, "A", "B", "C"),
                           Device("M", "NMOS", 1, "A", "B", "C")], [])


def test_dangling_pin_net_rejected():
    with pytest.raises(NetlistError, match="touches no device"):
        make_netlist("x", [Device("P", "PMOS", 1, "A", "B", "C"),
                           Device("N", "NMOS", 1, "A", "B", "C")],
                     [Pin("Z", "Z")])


def test_needs_both_kinds():
    with pytest.raises(NetlistError, match="PMOS and"):
        make_netlist("x", [Device("P", "PMOS", 1, "A", "B", "C")], [])


names = st.text(alphabet="abcdXZ", min_size=1, max_size=4)


@given(st.lists(names, min_size=1, max_size=4, unique=True),
       st.integers(min_value=1, max_value=4))
def test_json_serialize_parse_identity(nets, fins):
    devices = [Device(f"P{i}", "PMOS", fins, g, "VDD", "Y")
               for i, g in enumerate(nets)]
    devices.append(Device("N0", "NMOS", 1, nets[0], "VSS", "Y"))
    nl = make_netlist("cell", devices, [Pin("Y", "Y")] +
                      [Pin(g, g) for g in nets])
    assert parse_netlist(json.dumps(serialize_netlist(nl)), "json") == nl


def test_net_degree(nand2):
    # Y touches: P0 drain, P1 drain, N0 source, pin Y
    assert nand2.net_degree("Y") == 4
    assert sorted(nand2.nets) == ["A", "B", "VDD", "VSS", "Y", "n1"]
