"""Simulated-annealing placement: pairing, ordering, flips and pin slots
optimized together under the modified Lam schedule.

The schedule follows the standard three-phase target acceptance-rate curve
(warm start decaying to 44%, a long 44% plateau, then decay toward ~1%);
temperature is nudged multiplicatively toward the target each step, so no
per-problem tuning is needed. The initial temperature comes from 100
random-move probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .netlist import Netlist
from .placement import (PlacementRep, RealizedPlacement, default_slot_count,
                        gate_violations, initial_rep, realize_placement)
from .tech import TechParams

MOVE_KINDS = ("Flip", "Swap", "Move")
MOVE_TARGETS = ("P", "N", "Pair")
# 3 kinds x {P, N, Pair} plus Swap on Pins
MOVE_COMBOS = [(k, t) for k in MOVE_KINDS for t in MOVE_TARGETS] + [("Swap", "Pins")]


@dataclass(frozen=True)
class Move:
    kind: str
    target: str
    start: int
    length: int
    dest: int | None = None


@dataclass
class AnnealState:
    current: PlacementRep
    current_score: float
    best: PlacementRep
    best_score: float
    step: int
    accept_rate: float
    temperature: float


def net_spans(netlist: Netlist, realized: RealizedPlacement) -> dict:
    """Per net: [leftmost, rightmost] poly column over terminals and pins."""
    spans: dict = {}

    def touch(net, col):
        lo, hi = spans.get(net, (col, col))
        spans[net] = (min(lo, col), max(hi, col))

    for devs, xs in ((netlist.pmos, realized.x_p), (netlist.nmos, realized.x_n)):
        for d, col in zip(devs, xs):
            for net in (d.gate, d.source, d.drain):
                touch(net, col)
    for pin, col in zip(netlist.pins, realized.pin_cols):
        touch(pin.net, col)
    return spans


def crossings_at(spans: dict, col: int) -> int:
    return sum(1 for lo, hi in spans.values() if lo <= col <= hi)


def congestion(rep: PlacementRep, netlist: Netlist, tech: TechParams) -> float:
    """Blend of max and mean net crossings over the internal column boundaries."""
    realized = realize_placement(rep, netlist, tech)
    spans = net_spans(netlist, realized)
    boundaries = range(1, realized.width)
    counts = [sum(1 for lo, hi in spans.values() if lo <= b - 1 and hi >= b)
              for b in boundaries]
    if not counts:
        return 0.0
    a = tech.congestion_alpha
    return a * max(counts) + (1 - a) * (sum(counts) / len(counts))


def score(rep: PlacementRep, netlist: Netlist, tech: TechParams, predictor=None) -> float:
    w = tech.score_weights
    realized = realize_placement(rep, netlist, tech)
    total = w.w_width * realized.width
    if w.w_cong:
        total += w.w_cong * congestion(rep, netlist, tech)
    if w.w_viol:
        total += w.w_viol * gate_violations(rep, netlist)
    if predictor is not None:
        from .routability import extract_features, predict
        label, _probs = predict(extract_features(rep, netlist, tech), predictor)
        total += {0: 0.0, 1: tech.penalty_soft, 2: tech.penalty_hard}[
            ("routable", "routable_with_drcs", "not_routable").index(label)]
    return total


def _geometric_length(rng, cap: int) -> int:
    length = 1
    while length < cap and rng.random() < 0.5:
        length += 1
    return length


def propose(rng, rep: PlacementRep) -> Move:
    n = rep.n_slots
    kind, target = MOVE_COMBOS[rng.randrange(len(MOVE_COMBOS))]
    length = _geometric_length(rng, max(1, n // 2))
    start = rng.randrange(n - length + 1)
    dest = None
    if kind in ("Swap", "Move"):
        dest = rng.randrange(n - length + 1)
    return Move(kind, target, start, length, dest)


def _swap_runs(lst: list, a: int, b: int, length: int) -> None:
    for k in range(length):
        lst[a + k], lst[b + k] = lst[b + k], lst[a + k]


def _move_run(lst: list, start: int, length: int, dest: int) -> list:
    run = lst[start:start + length]
    rest = lst[:start] + lst[start + length:]
    return rest[:dest] + run + rest[dest:]


def apply(rep: PlacementRep, move: Move) -> PlacementRep:
    """Apply a move; permutation-plus-NULL invariants hold by construction."""
    s, L, d = move.start, move.length, move.dest
    if move.kind == "Flip":
        flip_p, flip_n = list(rep.flip_p), list(rep.flip_n)
        if move.target in ("P", "Pair"):
            for k in range(s, s + L):
                if rep.order_p[k] is not None:
                    flip_p[rep.order_p[k]] ^= True
        if move.target in ("N", "Pair"):
            for k in range(s, s + L):
                if rep.order_n[k] is not None:
                    flip_n[rep.order_n[k]] ^= True
        return replace(rep, flip_p=tuple(flip_p), flip_n=tuple(flip_n))

    lists = {"order_p": list(rep.order_p), "order_n": list(rep.order_n),
             "pin_slots": list(rep.pin_slots)}
    names = {"P": ("order_p",), "N": ("order_n",),
             "Pair": ("order_p", "order_n"), "Pins": ("pin_slots",)}[move.target]
    for name in names:
        if move.kind == "Swap":
            _swap_runs(lists[name], s, d, L)
        else:
            lists[name] = _move_run(lists[name], s, L, d)
    return replace(rep, order_p=tuple(lists["order_p"]),
                   order_n=tuple(lists["order_n"]),
                   pin_slots=tuple(lists["pin_slots"]))


def _lam_target(frac: float) -> float:
    if frac < 0.15:
        return 0.44 + 0.56 * 560.0 ** (-frac / 0.15)
    if frac < 0.65:
        return 0.44
    return 0.44 * 440.0 ** (-(frac - 0.65) / 0.35)


def _initial_temperature(rng, rep, netlist, tech) -> float:
    s0 = score(rep, netlist, tech)
    worse = []
    for _ in range(100):
        delta = score(apply(rep, propose(rng, rep)), netlist, tech) - s0
        if delta > 0:
            worse.append(delta)
    if not worse:
        return 1.0
    return (sum(worse) / len(worse)) / math.log(1 / 0.8)


@dataclass
class AnnealResult:
    rep: PlacementRep
    score: float
    trace: list          # best base score after each step
    steps: int


def anneal(netlist: Netlist, tech: TechParams, budget: int, rng,
           predictor=None, n_slots: int | None = None,
           target_score: float | None = None) -> AnnealResult:
    """Metropolis search returning the best representation seen.

    The routability predictor, when given, is consulted only in the final
    5% of steps. `target_score` enables early exit once the base score
    reaches a known bound.
    """
    assert budget >= 1
    n = n_slots or default_slot_count(netlist)
    cur = initial_rep(netlist, n)
    cur_s = score(cur, netlist, tech)
    state = AnnealState(current=cur, current_score=cur_s, best=cur,
                        best_score=cur_s, step=0, accept_rate=0.5,
                        temperature=max(_initial_temperature(rng, cur, netlist, tech), 1e-9))
    best_full = None  # (score, rep) under the predictor-augmented objective
    trace = []
    pred_on = False
    for step in range(budget):
        state.step = step
        frac = step / budget
        use_pred = predictor is not None and frac >= 0.95
        if use_pred and not pred_on:
            pred_on = True
            cur_s = score(state.current, netlist, tech, predictor)
            best_full = (score(state.best, netlist, tech, predictor), state.best)
        nxt = apply(state.current, propose(rng, state.current))
        nxt_s = score(nxt, netlist, tech, predictor if pred_on else None)
        delta = nxt_s - cur_s
        accepted = delta <= 0 or rng.random() < math.exp(-delta / state.temperature)
        if accepted:
            state.current, cur_s = nxt, nxt_s
            base = score(nxt, netlist, tech) if pred_on else nxt_s
            state.current_score = base
            if base < state.best_score:
                state.best, state.best_score = nxt, base
            if pred_on and cur_s < best_full[0]:
                best_full = (cur_s, nxt)
        state.accept_rate = 0.998 * state.accept_rate + 0.002 * (1.0 if accepted else 0.0)
        if state.accept_rate > _lam_target(frac):
            state.temperature *= 0.999
        else:
            state.temperature /= 0.999
        trace.append(state.best_score)
        if target_score is not None and state.best_score <= target_score + 1e-12:
            return AnnealResult(state.best, state.best_score, trace, step + 1)
    if best_full is not None:
        cand = (score(state.best, netlist, tech, predictor), state.best)
        final = min((best_full, cand), key=lambda p: p[0])
        return AnnealResult(final[1], final[0], trace, budget)
    return AnnealResult(state.best, state.best_score, trace, budget)
