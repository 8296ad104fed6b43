import json
import subprocess
import sys
from pathlib import Path

import pytest

from cellgen.cli import main
from cellgen.library import load_hand_cell
from cellgen.pipeline import PipelineOptions, run_pipeline
from cellgen.tech import default_tech

LIB = Path(__file__).parent.parent / "src" / "cellgen" / "library" / "v1"


def run_cli(*argv):
    return main(list(argv))


def test_pipeline_inverter_clean(tech):
    report, result, _grid = run_pipeline(
        load_hand_cell("inv"), tech, "pl-inv",
        PipelineOptions(steps=2000, restarts=2, generations=5, population=4))
    assert report["clean"] and report["width"] == 1
    assert report["drc_count"] == 0 and report["opens"] == 0 == report["shorts"]


def test_pipeline_seed_reproducible(tech):
    opts = PipelineOptions(steps=1500, restarts=2, generations=4, population=4)
    a, _s1, _g1 = run_pipeline(load_hand_cell("nand2"), tech, "pl-seed", opts)
    b, _s2, _g2 = run_pipeline(load_hand_cell("nand2"), tech, "pl-seed", opts)
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert a == b


def test_pipeline_stage_error_tagged():
    from dataclasses import replace
    from cellgen.errors import PipelineStageError
    tight = replace(default_tech(), max_width=1)
    with pytest.raises(PipelineStageError) as err:
        run_pipeline(load_hand_cell("latch"), tight, "pl-err",
                     PipelineOptions(steps=300, restarts=1))
    assert err.value.stage == "grid"


def test_pipeline_jobs_deterministic(tech):
    opts1 = PipelineOptions(steps=1200, restarts=3, generations=3, population=4, jobs=1)
    opts2 = PipelineOptions(steps=1200, restarts=3, generations=3, population=4, jobs=3)
    a, _x, _y = run_pipeline(load_hand_cell("nor2"), tech, "pl-jobs", opts1)
    b, _x2, _y2 = run_pipeline(load_hand_cell("nor2"), tech, "pl-jobs", opts2)
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert a == b


def test_cli_place_route_check_export(tmp_path):
    place = tmp_path / "p.json"
    routes = tmp_path / "r.json"
    assert run_cli("place", "--netlist", str(LIB / "nand2.json"), "--steps", "2000",
                   "--restarts", "2", "--seed", "cli-1", "--out", str(place)) == 0
    doc = json.loads(place.read_text())
    assert doc["width"] >= 2 and "order_p" in doc

    assert run_cli("route", "--netlist", str(LIB / "nand2.json"),
                   "--placement", str(place), "--seed", "cli-1",
                   "--out", str(routes)) == 0
    rdoc = json.loads(routes.read_text())
    assert rdoc["clean"] and rdoc["best_fitness"] == [0, 0]

    flat = tmp_path / "routes_flat.json"
    flat.write_text(json.dumps(rdoc["best_routes"]))
    check_out = tmp_path / "check.json"
    rc = run_cli("check", "--netlist", str(LIB / "nand2.json"),
                 "--placement", str(place), "--routes", str(flat),
                 "--out", str(check_out))
    cdoc = json.loads(check_out.read_text())
    assert rc == 0 and cdoc["markers"] == [] and cdoc["connectivity"] == []

    svg = tmp_path / "cell.svg"
    script = tmp_path / "cell.txt"
    assert run_cli("export", "--netlist", str(LIB / "nand2.json"),
                   "--placement", str(place), "--routes", str(flat),
                   "--svg", str(svg), "--script-out", str(script)) == 0
    assert svg.read_text().startswith("<svg")
    rc = run_cli("check", "--script", str(script), "--out", str(tmp_path / "c2.json"))
    assert rc == 0


def test_cli_check_flags_violations(tmp_path):
    place = tmp_path / "p.json"
    run_cli("place", "--netlist", str(LIB / "inv.json"), "--steps", "500",
            "--restarts", "1", "--seed", "cli-2", "--out", str(place))
    rc = run_cli("check", "--netlist", str(LIB / "inv.json"),
                 "--placement", str(place), "--out", str(tmp_path / "c.json"))
    assert rc == 1  # unrouted pins alone violate min segment length


def test_cli_full_report(tmp_path):
    out = tmp_path / "report.json"
    rc = run_cli("full", "--netlist", str(LIB / "mux2.json"), "--seed", "cli-3",
                 "--steps", "3000", "--restarts", "2", "--out", str(out))
    doc = json.loads(out.read_text())
    assert rc == 0 and doc["clean"]


def test_cli_fix_reports_remaining(tmp_path):
    place = tmp_path / "p.json"
    run_cli("place", "--netlist", str(LIB / "inv.json"), "--steps", "500",
            "--restarts", "1", "--seed", "cli-4", "--out", str(place))
    out = tmp_path / "fix.json"
    run_cli("fix", "--netlist", str(LIB / "inv.json"), "--placement", str(place),
            "--budget", "32", "--out", str(out))
    doc = json.loads(out.read_text())
    assert doc["remaining_drcs"] >= 0 and isinstance(doc["additions"], list)


def test_cli_spice_netlist(tmp_path):
    sp = tmp_path / "buf.sp"
    sp.write_text(".subckt buf A Y\n"
                  "MP0 Y A VDD VDD pmos\n"
                  "MN0 Y A VSS VSS nmos\n"
                  ".ends\n")
    out = tmp_path / "report.json"
    rc = run_cli("full", "--netlist", str(sp), "--seed", "cli-5",
                 "--steps", "1500", "--restarts", "2", "--out", str(out))
    assert rc == 0 and json.loads(out.read_text())["clean"]


def test_env_server_protocol():
    proc = subprocess.Popen([sys.executable, "-m", "cellgen", "serve-env",
                             "--place-steps", "1500"],
                            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    try:
        def rpc(obj):
            proc.stdin.write(json.dumps(obj) + "\n")
            proc.stdin.flush()
            return json.loads(proc.stdout.readline())

        first = rpc({"cmd": "reset", "cell": "nand2", "seed": 1})
        assert not first["done"] and len(first["obs"]) == 3
        h, w = len(first["obs"][0]), len(first["obs"][0][0])
        mask = [t * w + c for t in range(h) for c in range(w)
                if first["obs"][1][t][c] > 0.5]
        stepped = rpc({"cmd": "step", "action": mask[0] if mask else 0})
        assert "reward" in stepped and "done" in stepped
        again = rpc({"cmd": "reset", "cell": "nand2", "seed": 2})
        assert len(again["obs"]) == 3
        bad = rpc({"cmd": "bogus"})
        assert "error" in bad
        proc.stdin.write(json.dumps({"cmd": "close"}) + "\n")
        proc.stdin.flush()
        assert json.loads(proc.stdout.readline()) == {"ok": True}
        assert proc.wait(timeout=10) == 0
    finally:
        proc.kill()


def test_gen_dataset_small(tmp_path, tech):
    from cellgen.dataset import write_dataset
    from cellgen.library import generate_library
    cells = generate_library(1)[:2]
    path = tmp_path / "data.jsonl"
    stats = write_dataset(path, cells, tech, "ds-test", per_cell=2)
    lines = path.read_text().splitlines()
    assert stats["records"] == len(lines) == 4
    rec = json.loads(lines[0])
    assert rec["label"] in (0, 1, 2) and len(rec["features"][0]) == 11
