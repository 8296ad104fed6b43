"""End-to-end flow: place -> route -> fix -> check -> export.

All randomness derives from one seed through named substreams, so stages
are independently reproducible and parallel restarts change nothing.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .annealer import AnnealResult, anneal
from .drc import check_connectivity, check_drc
from .errors import PipelineStageError
from .ga import evolve
from .grid import build_grid
from .netlist import Netlist
from .placement import realize_placement
from .tech import TechParams


def _sa_task(args):
    netlist, tech, steps, key, predictor, target = args
    res = anneal(netlist, tech, steps, random.Random(key),
                 predictor=predictor, target_score=target)
    return res.score, res.rep, res.steps


def place_with_restarts(netlist: Netlist, tech: TechParams, steps: int,
                        restarts: int, seed, jobs: int = 1, predictor=None,
                        target_score=None) -> AnnealResult:
    """Best representation over seeded restarts; deterministic reduce."""
    tasks = [(netlist, tech, steps, f"{seed}/sa/{i}", predictor, target_score)
             for i in range(restarts)]
    if jobs > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, restarts)) as pool:
            outcomes = list(pool.map(_sa_task, tasks))
    else:
        outcomes = [_sa_task(t) for t in tasks]
    best_i = min(range(len(outcomes)), key=lambda i: (outcomes[i][0], i))
    score, rep, steps_used = outcomes[best_i]
    return AnnealResult(rep, score, [], steps_used)


@dataclass
class PipelineOptions:
    steps: int = 8000
    restarts: int = 4
    generations: int = 10
    population: int = 8
    jobs: int = 1
    fixer: str = "greedy"
    policy_tensors: dict | None = None
    predictor: dict | None = None
    collect_all: bool = False


def run_pipeline(netlist: Netlist, tech: TechParams, seed,
                 options: PipelineOptions | None = None):
    """Returns (report dict, best solution, overlay grid)."""
    opt = options or PipelineOptions()
    t0 = time.monotonic()
    try:
        sa = place_with_restarts(netlist, tech, opt.steps, opt.restarts, seed,
                                 jobs=opt.jobs, predictor=opt.predictor)
        realized = realize_placement(sa.rep, netlist, tech)
    except Exception as e:
        raise PipelineStageError("place", str(e)) from e
    try:
        grid = build_grid(realized, netlist, tech)
    except Exception as e:
        raise PipelineStageError("grid", str(e)) from e
    try:
        result = evolve(netlist, realized, opt.generations, opt.population,
                        f"{seed}/route", tech, fixer=opt.fixer,
                        policy_tensors=opt.policy_tensors,
                        collect_all=opt.collect_all, base_grid=grid,
                        jobs=opt.jobs)
    except Exception as e:
        raise PipelineStageError("route", str(e)) from e
    overlay = result.best.overlay()
    markers = check_drc(overlay, tech)
    problems = check_connectivity(overlay, netlist)
    opens = sum(1 for _n, kind in problems if kind == "open")
    shorts = sum(1 for _n, kind in problems if kind == "short")
    report = {
        "format_version": 1,
        "cell": netlist.name,
        "seed": str(seed),
        "width": realized.width,
        "placement_score": sa.score,
        "drc_count": len(markers),
        "opens": opens,
        "shorts": shorts,
        "unrouted": result.best_fitness[0],
        "solutions_found": len(result.solutions),
        "generations": result.generations,
        "clean": bool(result.clean and not markers and not problems),
        "runtime_ms": int((time.monotonic() - t0) * 1000),
    }
    return report, result, overlay
