"""Genetic routing flow: populations of routing solutions, image-cut
crossover, region mutation, lexicographic fitness, DRC fixer in the loop.

A solution's chromosome is the per-pair route set. Crossover picks a
vertical or horizontal cut line in the cell image; one child takes mom's
routes entirely on the left plus dad's entirely on the right (the other
child mirrors), pairs routed identically by both parents survive
regardless of the cut, and everything else becomes unrouted. Mutation
rips out every route touching a random rectangle. Children are completed
by maze-routing open pairs in random order and handed to the DRC fixer;
survivor selection keeps the top K of parents and children, and any
fully-routed zero-DRC child returns immediately.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .drc import check_connectivity, check_drc, same_net_dsu
from .fixenv import default_fix_budget, greedy_fix_grid, policy_fix_grid
from .grid import LayoutGrid
from .netlist import Netlist
from .placement import RealizedPlacement
from .router import Route, TerminalPair, maze_route, terminal_pairs
from .tech import TechParams


@dataclass
class RoutingSolution:
    base: LayoutGrid
    pairs: tuple
    routes: dict = field(default_factory=dict)   # pair.key() -> Route
    patches: tuple = ()                          # ((net id, t, c), ...) on M1
    fitness: tuple | None = None

    def overlay(self) -> LayoutGrid:
        grid = self.base.copy()
        for route in self.routes.values():
            grid.mark(route.added, grid.net_id(route.pair.net))
        for net, t, c in self.patches:
            grid.layers["M1"][t, c] = net
        return grid

    def with_patches(self, additions) -> "RoutingSolution":
        return replace(self, patches=self.patches + tuple(additions), fitness=None)


def _connected_flags(sol: RoutingSolution, grid: LayoutGrid) -> list[bool]:
    dsu = same_net_dsu(grid)
    return [dsu.find(tuple(p.a)) == dsu.find(tuple(p.b)) for p in sol.pairs]


def fitness(sol: RoutingSolution, tech: TechParams, grid: LayoutGrid | None = None) -> tuple:
    """(unrouted pairs, DRC markers); lexicographically smaller is fitter."""
    grid = grid or sol.overlay()
    unrouted = _connected_flags(sol, grid).count(False)
    drcs = len(check_drc(grid, tech))
    return (unrouted, drcs)


def complete(sol: RoutingSolution, rng: random.Random, tech: TechParams) -> RoutingSolution:
    """Drop routes whose pairs came apart, then maze-route all open pairs
    in a random order."""
    routes = dict(sol.routes)
    grid = sol.base.copy()
    for route in routes.values():
        grid.mark(route.added, grid.net_id(route.pair.net))
    while True:  # removing one phantom route can strand another
        flags = _connected_flags(replace(sol, routes=routes), grid)
        stale = [p for p, ok in zip(sol.pairs, flags)
                 if not ok and p.key() in routes]
        if not stale:
            break
        for p in stale:
            grid.unmark(routes.pop(p.key()).added)
    open_pairs = [p for p, ok in
                  zip(sol.pairs, _connected_flags(replace(sol, routes=routes), grid))
                  if not ok]
    rng.shuffle(open_pairs)
    for pair in open_pairs:
        route = maze_route(grid, pair, rng, tech)
        if route is not None and route.points:
            grid.mark(route.added, grid.net_id(pair.net))
            routes[pair.key()] = route
    return replace(sol, routes=routes, fitness=None)


def crossover(dad: RoutingSolution, mom: RoutingSolution, rng: random.Random):
    """Two children from one random cut; see module docstring for the split."""
    grid = dad.base
    vertical = rng.random() < 0.5
    cut = rng.randint(0, grid.width if vertical else grid.height)

    def child(left_parent: RoutingSolution, right_parent: RoutingSolution):
        routes: dict = {}
        occupied: dict = {}

        def try_add(route: Route):
            key = route.pair.key()
            if key in routes:
                return
            net = grid.net_id(route.pair.net)
            if any(occupied.get(p, net) != net for p in route.added):
                return  # conflicting inheritance: later insert drops
            for p in route.added:
                occupied[p] = net
            routes[key] = route

        for key in sorted(left_parent.routes):
            route = left_parent.routes[key]
            if route.side(vertical, cut) == "left":
                try_add(route)
        for key in sorted(right_parent.routes):
            route = right_parent.routes[key]
            if route.side(vertical, cut) == "right":
                try_add(route)
        for key in sorted(left_parent.routes):  # identical in both parents
            other = right_parent.routes.get(key)
            if other is not None and other.points == left_parent.routes[key].points:
                try_add(left_parent.routes[key])
        return RoutingSolution(dad.base, dad.pairs, routes)

    return child(mom, dad), child(dad, mom)


def mutate(sol: RoutingSolution, rng: random.Random,
           region: tuple | None = None) -> RoutingSolution:
    """Remove every route touching an axis-aligned region; drawn sides are
    uniform in [1, dim/2] unless an explicit region is given."""
    if region is None:
        h, w = sol.base.height, sol.base.width
        rh = rng.randint(1, max(1, h // 2))
        rw = rng.randint(1, max(1, w // 2))
        t0 = rng.randint(0, h - rh)
        c0 = rng.randint(0, w - rw)
        region = (t0, c0, t0 + rh - 1, c0 + rw - 1)
    routes = {key: r for key, r in sol.routes.items() if not r.touches(*region)}
    return replace(sol, routes=routes, fitness=None)


def select_parents(population: list, rng: random.Random):
    """Two independent size-2 tournaments; the fitter wins with p=0.75."""

    def pick():
        if len(population) == 1:
            return population[0]
        i, j = rng.sample(range(len(population)), 2)
        a, b = population[i], population[j]
        if a.fitness == b.fitness:
            return a if rng.random() < 0.5 else b
        fit, unfit = (a, b) if a.fitness < b.fitness else (b, a)
        return fit if rng.random() < 0.75 else unfit

    return pick(), pick()


@dataclass
class EvolveResult:
    solutions: list
    best: RoutingSolution
    best_fitness: tuple
    trace: list
    generations: int
    clean: bool


def _apply_fixer(sol: RoutingSolution, tech: TechParams, fixer: str,
                 policy_tensors, budget: int | None):
    if fixer == "none":
        return sol
    grid = sol.overlay()
    if not check_drc(grid, tech):
        return sol
    budget = budget or default_fix_budget(grid)
    if fixer == "greedy":
        additions, _rem = greedy_fix_grid(grid, tech, budget)
    elif fixer == "policy":
        additions, _rem = policy_fix_grid(grid, tech, policy_tensors, budget)
    else:
        raise ValueError(f"unknown fixer {fixer!r}")
    return sol.with_patches(additions) if additions else sol


def _evaluate(sol: RoutingSolution, netlist: Netlist, tech: TechParams):
    grid = sol.overlay()
    sol.fitness = fitness(sol, tech, grid)
    clean = sol.fitness == (0, 0) and not check_connectivity(grid, netlist)
    return clean


def _child_pair_task(args):
    """Build, complete, fix and evaluate one crossover pair (picklable)."""
    netlist, pop, i, seed, g, tech, fixer, tensors, budget, want = args
    rng = random.Random(f"{seed}/gen/{g}/child/{i}")
    dad, mom = select_parents(pop, rng)
    out = []
    for raw in crossover(dad, mom, rng)[:want]:
        sol = complete(mutate(raw, rng), rng, tech)
        sol = _apply_fixer(sol, tech, fixer, tensors, budget)
        out.append((sol, _evaluate(sol, netlist, tech)))
    return out


def _generation_children(netlist, pop, seed, g, tech, fixer, tensors, budget,
                         population, executor):
    """Yield evaluated (child, clean) in a fixed order; parallel when given
    an executor, with results identical to the serial path."""
    tasks = [(netlist, pop, i, seed, g, tech, fixer, tensors, budget,
              min(2, population - i)) for i in range(0, population, 2)]
    if executor is None:
        for task in tasks:
            yield from _child_pair_task(task)
    else:
        for pair in executor.map(_child_pair_task, tasks):
            yield from pair


def evolve(netlist: Netlist, realized: RealizedPlacement, generations: int,
           population: int, seed, tech: TechParams, fixer: str = "greedy",
           policy_tensors=None, collect_all: bool = False,
           fixer_budget: int | None = None,
           base_grid: LayoutGrid | None = None, jobs: int = 1) -> EvolveResult:
    """Run the full routing flow and return DRC-free solutions when found.

    Deterministic for a fixed seed regardless of `jobs`: every stochastic
    stage draws from its own named substream.
    """
    assert generations >= 1 and population >= 1
    from .grid import build_grid

    base = base_grid if base_grid is not None else build_grid(realized, netlist, tech)
    pairs = tuple(terminal_pairs(netlist, realized, base))
    pop: list = []
    found: list = []
    for i in range(population):
        rng = random.Random(f"{seed}/init/{i}")
        sol = complete(RoutingSolution(base, pairs), rng, tech)
        if _evaluate(sol, netlist, tech) and not collect_all:
            return EvolveResult([sol], sol, sol.fitness, [sol.fitness], 0, True)
        if sol.fitness == (0, 0):
            found.append(sol)
        pop.append(sol)
    trace = [min(s.fitness for s in pop)]
    if found and collect_all:
        best = min(pop, key=lambda s: s.fitness)
        return EvolveResult(found, best, best.fitness, trace, 0, True)

    executor = None
    if jobs > 1 and population > 1:
        from concurrent.futures import ProcessPoolExecutor
        executor = ProcessPoolExecutor(max_workers=jobs)
    try:
        for g in range(1, generations + 1):
            children: list = []
            for sol, clean in _generation_children(
                    netlist, pop, seed, g, tech, fixer, policy_tensors,
                    fixer_budget, population, executor):
                if clean:
                    found.append(sol)
                    if not collect_all:
                        trace.append(sol.fitness)
                        return EvolveResult([sol], sol, sol.fitness, trace, g, True)
                children.append(sol)
            # stable sort: parents precede children on fitness ties
            pop = sorted(pop + children, key=lambda s: s.fitness)[:population]
            trace.append(min(s.fitness for s in pop))
            if found and collect_all:
                best = min(pop, key=lambda s: s.fitness)
                return EvolveResult(found, best, best.fitness, trace, g, True)
    finally:
        if executor is not None:
            executor.shutdown()
    best = min(pop, key=lambda s: s.fitness)
    return EvolveResult(found, best, best.fitness, trace, generations, bool(found))
