"""Command-line interface.

Verbs: place, route, fix, check, full, export, serve-env, gen-dataset.
Global flags: --config (TechParams JSON), --seed, --jobs.
"""

from __future__ import annotations

import argparse
import json
import sys

from .drc import check_connectivity, check_drc
from .errors import CellgenError
from .export import export_script, export_svg, import_script
from .fixenv import default_fix_budget, greedy_fix_grid, policy_fix_grid
from .ga import evolve
from .grid import build_grid
from .library import generate_library
from .netlist import load_netlist, serialize_netlist
from .pipeline import PipelineOptions, place_with_restarts, run_pipeline
from .placement import realize_placement, rep_from_json, rep_to_json
from .policy import validate_policy_weights
from .routability import validate_routability_weights
from .tech import load_tech
from .weights import load_weights


def _write(payload, out_path):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=1)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _routes_json(solution):
    routes = [{"net": r.pair.net, "points": [list(p) for p in r.points]}
              for _k, r in sorted(solution.routes.items())]
    grid = solution.base
    routes += [{"net": grid.net_name(nid), "points": [["M1", t, c]]}
               for nid, t, c in solution.patches]
    return routes


def _grid_from_args(args, tech):
    if getattr(args, "script", None):
        with open(args.script) as f:
            return import_script(f.read()), None
    netlist = load_netlist(args.netlist)
    with open(args.placement) as f:
        rep = rep_from_json(json.load(f))
    realized = realize_placement(rep, netlist, tech)
    grid = build_grid(realized, netlist, tech)
    if getattr(args, "routes", None):
        with open(args.routes) as f:
            doc = json.load(f)
        for entry in doc if isinstance(doc, list) else doc["routes"]:
            nid = grid.net_id(entry["net"])
            for layer, t, c in entry["points"]:
                grid.layers[layer][t, c] = nid
    return grid, netlist


def _fixer_args(spec_text):
    if spec_text == "greedy" or spec_text == "none":
        return spec_text, None
    if spec_text.startswith("policy:"):
        tensors = validate_policy_weights(load_weights(spec_text.split(":", 1)[1]))
        return "policy", tensors
    raise CellgenError(f"unknown fixer {spec_text!r}")


def cmd_place(args, tech):
    netlist = load_netlist(args.netlist)
    predictor = None
    if args.predictor:
        predictor = validate_routability_weights(load_weights(args.predictor))
    if args.weights:
        from dataclasses import replace
        from .tech import ScoreWeights
        w, c, v = (float(x) for x in args.weights.split(","))
        tech = replace(tech, score_weights=ScoreWeights(w, c, v))
    res = place_with_restarts(netlist, tech, args.steps, args.restarts,
                              args.seed, jobs=args.jobs, predictor=predictor)
    realized = realize_placement(res.rep, netlist, tech)
    payload = rep_to_json(res.rep)
    payload.update({"cell": netlist.name, "score": res.score, "width": realized.width})
    _write(payload, args.out)
    return 0


def cmd_route(args, tech):
    netlist = load_netlist(args.netlist)
    with open(args.placement) as f:
        rep = rep_from_json(json.load(f))
    realized = realize_placement(rep, netlist, tech)
    fixer, tensors = _fixer_args(args.fixer)
    result = evolve(netlist, realized, args.gens, args.pop, args.seed, tech,
                    fixer=fixer, policy_tensors=tensors,
                    collect_all=args.collect_all)
    payload = {
        "format_version": 1,
        "cell": netlist.name,
        "clean": result.clean,
        "generations": result.generations,
        "best_fitness": list(result.best_fitness),
        "trace": [list(f) for f in result.trace],
        "solutions": [{"fitness": list(s.fitness), "routes": _routes_json(s)}
                      for s in result.solutions],
        "best_routes": _routes_json(result.best),
    }
    _write(payload, args.out)
    return 0 if result.clean else 1


def cmd_fix(args, tech):
    grid, _netlist = _grid_from_args(args, tech)
    budget = args.budget or default_fix_budget(grid)
    fixer, tensors = _fixer_args(args.fixer)
    if fixer == "policy":
        additions, remaining = policy_fix_grid(grid, tech, tensors, budget)
    else:
        additions, remaining = greedy_fix_grid(grid, tech, budget)
    payload = {"format_version": 1, "remaining_drcs": remaining,
               "additions": [{"net": grid.net_name(n), "track": t, "col": c}
                             for n, t, c in additions]}
    _write(payload, args.out)
    return 0 if remaining == 0 else 1


def cmd_check(args, tech):
    grid, netlist = _grid_from_args(args, tech)
    markers = check_drc(grid, tech)
    problems = check_connectivity(grid, netlist)
    payload = {"format_version": 1,
               "markers": [m.to_json() for m in markers],
               "connectivity": [{"net": n, "kind": k} for n, k in problems]}
    _write(payload, args.out)
    return 1 if markers or problems else 0


def cmd_export(args, tech):
    grid, _netlist = _grid_from_args(args, tech)
    if args.svg:
        _write(export_svg(grid, tech=tech), args.svg)
    if args.script_out:
        _write(export_script(grid), args.script_out)
    return 0


def cmd_full(args, tech):
    netlist = load_netlist(args.netlist)
    fixer, tensors = _fixer_args(args.fixer)
    predictor = None
    if args.predictor:
        predictor = validate_routability_weights(load_weights(args.predictor))
    options = PipelineOptions(steps=args.steps, restarts=args.restarts,
                              generations=args.gens, population=args.pop,
                              jobs=args.jobs, fixer=fixer,
                              policy_tensors=tensors, predictor=predictor)
    report, result, overlay = run_pipeline(netlist, tech, args.seed, options)
    if args.svg:
        _write(export_svg(overlay, tech=tech), args.svg)
    if args.script_out:
        _write(export_script(overlay), args.script_out)
    if args.routes_out:
        _write({"format_version": 1, "routes": _routes_json(result.best)},
               args.routes_out)
    _write(report, args.out)
    return 0 if report["clean"] else 1


def cmd_serve_env(args, tech):
    from .envserver import serve
    serve(tech, place_steps=args.place_steps)
    return 0


def cmd_gen_dataset(args, tech):
    from .dataset import write_dataset
    cells = generate_library(args.library_seed)
    stats = write_dataset(args.out, cells, tech, args.seed, per_cell=args.per_cell)
    _write(stats, None)
    return 0


def cmd_library(args, tech):
    cells = generate_library(args.library_seed)
    payload = [serialize_netlist(c.netlist) | {"width_bound": c.width_bound}
               for c in cells]
    _write(payload, args.out)
    return 0


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TechParams JSON file")
    common.add_argument("--seed", default="0")
    common.add_argument("--jobs", type=int, default=1)
    top = argparse.ArgumentParser(prog="cellgen", description=__doc__,
                                  parents=[common])
    sub = top.add_subparsers(dest="cmd", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("place", help="simulated-annealing placement")
    p.add_argument("--netlist", required=True)
    p.add_argument("--steps", type=int, default=8000)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--weights", help="w_width,w_cong,w_viol")
    p.add_argument("--predictor", help="routability weight file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_place)

    p = add_parser("route", help="genetic routing flow")
    p.add_argument("--netlist", required=True)
    p.add_argument("--placement", required=True)
    p.add_argument("--gens", type=int, default=10)
    p.add_argument("--pop", type=int, default=8)
    p.add_argument("--fixer", default="greedy", help="greedy|policy:<weights>|none")
    p.add_argument("--collect-all", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_route)

    p = add_parser("fix", help="run the DRC fixer on existing routes")
    p.add_argument("--netlist")
    p.add_argument("--placement")
    p.add_argument("--routes")
    p.add_argument("--script", help="layout script instead of netlist+placement+routes")
    p.add_argument("--fixer", default="greedy")
    p.add_argument("--budget", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fix)

    p = add_parser("check", help="DRC + connectivity report")
    p.add_argument("--netlist")
    p.add_argument("--placement")
    p.add_argument("--routes")
    p.add_argument("--script")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = add_parser("export", help="SVG / script export")
    p.add_argument("--netlist")
    p.add_argument("--placement")
    p.add_argument("--routes")
    p.add_argument("--script")
    p.add_argument("--svg")
    p.add_argument("--script-out")
    p.set_defaults(func=cmd_export)

    p = add_parser("full", help="place + route + fix + check")
    p.add_argument("--netlist", required=True)
    p.add_argument("--steps", type=int, default=8000)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--gens", type=int, default=10)
    p.add_argument("--pop", type=int, default=8)
    p.add_argument("--fixer", default="greedy")
    p.add_argument("--predictor")
    p.add_argument("--svg")
    p.add_argument("--script-out")
    p.add_argument("--routes-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_full)

    p = add_parser("serve-env", help="JSON line protocol environment server")
    p.add_argument("--place-steps", type=int, default=6000)
    p.set_defaults(func=cmd_serve_env)

    p = add_parser("gen-dataset", help="routability training data (JSONL)")
    p.add_argument("--out", required=True)
    p.add_argument("--per-cell", type=int, default=20)
    p.add_argument("--library-seed", type=int, default=1)
    p.set_defaults(func=cmd_gen_dataset)

    p = add_parser("library", help="dump the fixture library")
    p.add_argument("--library-seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_library)

    args = top.parse_args(argv)
    tech = load_tech(args.config)
    try:
        return args.func(args, tech)
    except CellgenError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
