"""Step-based M1 DRC-fixing environment plus the greedy baseline agent.

Observations are three binary planes over the M1 grid: routes, action
mask, DRC marks. An action claims one empty M1 cell for the unique
horizontally adjacent net; metal is only ever added, never removed.
Reward is reward_step + reward_drc_coeff * (drc_before - drc_after); an
illegal action ends the episode with just the step reward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .drc import check_drc
from .grid import EMPTY, LayoutGrid
from .tech import TechParams


@dataclass
class StepResult:
    obs: np.ndarray
    reward: float
    done: bool
    info: dict


def action_mask(grid: LayoutGrid) -> np.ndarray:
    """Cells that may be claimed: empty on M1, adjacent to exactly one net."""
    m1 = grid.layers["M1"]
    h, w = grid.height, grid.width
    mask = np.zeros((h, w), dtype=bool)
    for t in range(h):
        row = m1[t]
        for c in range(w):
            if row[c] != EMPTY:
                continue
            nets = set()
            if c > 0 and row[c - 1] > 0:
                nets.add(int(row[c - 1]))
            if c + 1 < w and row[c + 1] > 0:
                nets.add(int(row[c + 1]))
            if len(nets) == 1:
                mask[t, c] = True
    return mask


def _adjacent_net(grid: LayoutGrid, t: int, c: int) -> int:
    row = grid.layers["M1"][t]
    if c > 0 and row[c - 1] > 0:
        return int(row[c - 1])
    return int(row[c + 1])


class DrcFixEnv:
    """Owns a private copy of the grid; deterministic given the action sequence."""

    def __init__(self, grid: LayoutGrid, tech: TechParams):
        self.tech = tech
        self._source = grid
        self.grid = None
        self.markers = []
        self.done = True
        self.steps = 0
        self.additions: list = []

    @property
    def drc_count(self) -> int:
        return len(self.markers)

    def observation(self) -> np.ndarray:
        h, w = self.grid.height, self.grid.width
        obs = np.zeros((3, h, w), dtype=np.float32)
        obs[0] = self.grid.layers["M1"] > 0
        obs[1] = action_mask(self.grid)
        for m in self.markers:  # one cell per marker, at its position
            obs[2][m.position] = 1.0
        return obs

    def reset(self) -> np.ndarray:
        self.grid = self._source.copy()
        self.markers = check_drc(self.grid, self.tech)
        self.done = False
        self.steps = 0
        self.additions = []
        return self.observation()

    def step(self, action: int) -> StepResult:
        if self.done:
            raise RuntimeError("step() on a finished episode")
        h, w = self.grid.height, self.grid.width
        t, c = divmod(int(action), w)
        self.steps += 1
        mask = action_mask(self.grid)
        if not (0 <= t < h and 0 <= c < w) or not mask[t, c]:
            self.done = True
            return StepResult(self.observation(), self.tech.reward_step, True,
                              {"drc_count": self.drc_count, "illegal": True})
        net = _adjacent_net(self.grid, t, c)
        self.grid.layers["M1"][t, c] = net
        self.additions.append((net, t, c))
        prev = self.drc_count
        self.markers = check_drc(self.grid, self.tech)
        reward = self.tech.reward_step + self.tech.reward_drc_coeff * (prev - self.drc_count)
        self.done = self.drc_count == 0
        return StepResult(self.observation(), reward, self.done,
                          {"drc_count": self.drc_count, "illegal": False})


def default_fix_budget(grid: LayoutGrid) -> int:
    return 2 * grid.height * grid.width


def _count_after(grid: LayoutGrid, tech: TechParams, t: int, c: int, net: int) -> int:
    m1 = grid.layers["M1"]
    m1[t, c] = net
    n = len(check_drc(grid, tech))
    m1[t, c] = EMPTY
    return n


def greedy_fix_grid(grid: LayoutGrid, tech: TechParams, budget: int):
    """One-step lookahead on ΔDRC with a width-4 two-step beam on plateaus.

    Returns (additions, remaining_drcs); the DRC count never increases
    along the trajectory.
    """
    work = grid.copy()
    count = len(check_drc(work, tech))
    additions: list = []
    steps = 0
    w = work.width
    while count > 0 and steps < budget:
        mask = action_mask(work)
        cands = [(t, c) for t in range(work.height) for c in range(w) if mask[t, c]]
        if not cands:
            break
        afters = [_count_after(work, tech, t, c, _adjacent_net(work, t, c))
                  for t, c in cands]
        best, best_after = None, count
        for tc, after in zip(cands, afters):
            if after < best_after:
                best, best_after = tc, after
        if best is not None:
            t, c = best
            net = _adjacent_net(work, t, c)
            work.layers["M1"][t, c] = net
            additions.append((net, t, c))
            count = best_after
            steps += 1
            continue
        # plateau: try pairs starting from a zero-delta move
        combo = None
        beam = [tc for tc, after in zip(cands, afters) if after == count][:4]
        for t, c in beam:
            net = _adjacent_net(work, t, c)
            work.layers["M1"][t, c] = net
            mask2 = action_mask(work)
            for t2 in range(work.height):
                for c2 in range(w):
                    if mask2[t2, c2]:
                        after2 = _count_after(work, tech, t2, c2, _adjacent_net(work, t2, c2))
                        if after2 < count:
                            combo = ((net, t, c),
                                     (_adjacent_net(work, t2, c2), t2, c2), after2)
                            break
                if combo:
                    break
            work.layers["M1"][t, c] = EMPTY
            if combo:
                break
        if combo is None or steps + 2 > budget:
            break
        (n1, t1, c1), (n2, t2, c2), count = combo
        work.layers["M1"][t1, c1] = n1
        work.layers["M1"][t2, c2] = n2
        additions += [(n1, t1, c1), (n2, t2, c2)]
        steps += 2
    check_drc(work, tech)  # leave cuts fresh on the scratch copy
    return additions, count


def policy_fix_grid(grid: LayoutGrid, tech: TechParams, tensors: dict, budget: int):
    """Greedy rollout of the conv policy: argmax over masked probabilities."""
    from .policy import policy_forward

    env = DrcFixEnv(grid, tech)
    obs = env.reset()
    while not env.done and env.steps < budget:
        mask = obs[1].reshape(-1) > 0.5
        if not mask.any():
            break
        probs, _value = policy_forward(obs, tensors)
        obs = env.step(int(np.argmax(probs))).obs
    return list(env.additions), env.drc_count


def greedy_fix(solution, tech: TechParams, budget: int | None = None):
    """Fix a routing solution's overlay; returns (patched solution, remaining)."""
    grid = solution.overlay()
    additions, remaining = greedy_fix_grid(grid, tech, budget or default_fix_budget(grid))
    return solution.with_patches(additions), remaining
