"""Routability training data: per cell, annealed placements of varying
quality, each routed with a deliberately reduced budget and labelled by
the outcome. Half the placements anneal width-only on a tight slot count,
which yields the congested layouts that separate the three labels."""

from __future__ import annotations

import json
import random
from dataclasses import replace

from .annealer import anneal
from .ga import evolve
from .library import FixtureCell
from .placement import realize_placement
from .routability import extract_features
from .tech import ScoreWeights, TechParams

LABEL_ROUTABLE = 0
LABEL_ROUTABLE_WITH_DRCS = 1
LABEL_NOT_ROUTABLE = 2

# deliberately small budgets: pessimistic labels diversify the dataset
REDUCED_STEPS = (100, 300, 1000, 3000)
REDUCED_GENERATIONS = 1
REDUCED_POPULATION = 2
REDUCED_FIX_BUDGET = 6


def label_placement(netlist, realized, tech: TechParams, seed) -> int:
    result = evolve(netlist, realized, REDUCED_GENERATIONS, REDUCED_POPULATION,
                    seed, tech, fixer="greedy", fixer_budget=REDUCED_FIX_BUDGET)
    unrouted, drcs = result.best_fitness
    if unrouted > 0:
        return LABEL_NOT_ROUTABLE
    return LABEL_ROUTABLE if drcs == 0 else LABEL_ROUTABLE_WITH_DRCS


def gen_dataset(cells: list, tech: TechParams, seed, per_cell: int = 20):
    """Yield JSONL-ready records {cell, features, label}."""
    squeezed = replace(tech, score_weights=ScoreWeights(1.0, 0.0, 0.0))
    for cell in cells:
        tight = max(len(cell.netlist.pmos), len(cell.netlist.nmos),
                    len(cell.netlist.pins))
        for k in range(per_cell):
            steps = REDUCED_STEPS[k % len(REDUCED_STEPS)]
            rng = random.Random(f"{seed}/data/{cell.name}/{k}")
            if k % 2:
                sa = anneal(cell.netlist, squeezed, steps, rng, n_slots=tight)
            else:
                sa = anneal(cell.netlist, tech, steps, rng)
            realized = realize_placement(sa.rep, cell.netlist, tech)
            label = label_placement(cell.netlist, realized, tech,
                                    f"{seed}/label/{cell.name}/{k}")
            features = extract_features(sa.rep, cell.netlist, tech)
            yield {"cell": cell.name, "features": features.tolist(),
                   "label": label}


def write_dataset(path, cells, tech: TechParams, seed, per_cell: int = 20) -> dict:
    counts = [0, 0, 0]
    with open(path, "w") as f:
        for record in gen_dataset(cells, tech, seed, per_cell):
            counts[record["label"]] += 1
            f.write(json.dumps(record) + "\n")
    return {"records": sum(counts), "by_label": counts}
