"""Line-delimited JSON environment protocol over standard streams.

Requests:  {"cmd":"reset","cell":<library name | netlist object>,"seed":int}
           {"cmd":"step","action":int}
           {"cmd":"close"}
Responses: {"obs":[3][H][W],"reward":float,"done":bool,"info":{...}}
Errors:    {"error": "..."}

Each reset re-routes the cell's nets in a fresh seeded random order, so
consecutive episodes see different initial routes and DRC patterns. The
placement per cell is computed once per session (seeded annealing) and
cached.
"""

from __future__ import annotations

import json
import random
import sys

from .fixenv import DrcFixEnv
from .ga import RoutingSolution, complete
from .grid import build_grid
from .library import find_cell
from .netlist import parse_netlist
from .pipeline import place_with_restarts
from .placement import realize_placement
from .router import terminal_pairs
from .tech import TechParams


class EnvSession:
    def __init__(self, tech: TechParams, place_steps: int = 6000,
                 place_restarts: int = 2):
        self.tech = tech
        self.place_steps = place_steps
        self.place_restarts = place_restarts
        self._cells: dict = {}
        self.env: DrcFixEnv | None = None
        self.episodes = 0

    def _cell_context(self, cell):
        key = cell if isinstance(cell, str) else json.dumps(cell, sort_keys=True)
        if key not in self._cells:
            netlist = (find_cell(cell) if isinstance(cell, str)
                       else parse_netlist(json.dumps(cell), "json"))
            sa = place_with_restarts(netlist, self.tech, self.place_steps,
                                     self.place_restarts, f"env/{netlist.name}")
            realized = realize_placement(sa.rep, netlist, self.tech)
            grid = build_grid(realized, netlist, self.tech)
            pairs = tuple(terminal_pairs(netlist, realized, grid))
            self._cells[key] = (netlist, grid, pairs)
        return self._cells[key]

    def reset(self, cell, seed) -> dict:
        netlist, grid, pairs = self._cell_context(cell)
        self.episodes += 1
        order_seed = seed if seed is not None else self.episodes
        rng = random.Random(f"episode/{netlist.name}/{order_seed}")
        sol = complete(RoutingSolution(grid, pairs), rng, self.tech)
        self.env = DrcFixEnv(sol.overlay(), self.tech)
        obs = self.env.reset()
        return {"obs": obs.tolist(), "reward": 0.0, "done": False,
                "info": {"drc_count": self.env.drc_count, "illegal": False,
                         "cell": netlist.name}}

    def step(self, action) -> dict:
        if self.env is None:
            raise RuntimeError("step before reset")
        res = self.env.step(int(action))
        return {"obs": res.obs.tolist(), "reward": res.reward,
                "done": res.done, "info": res.info}


def serve(tech: TechParams, stdin=None, stdout=None, **session_kw) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = EnvSession(tech, **session_kw)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            cmd = req.get("cmd")
            if cmd == "reset":
                resp = session.reset(req.get("cell"), req.get("seed"))
            elif cmd == "step":
                resp = session.step(req["action"])
            elif cmd == "close":
                stdout.write(json.dumps({"ok": True}) + "\n")
                stdout.flush()
                return
            else:
                resp = {"error": f"unknown cmd {cmd!r}"}
        except Exception as e:  # protocol must stay alive on bad requests
            resp = {"error": str(e)}
        stdout.write(json.dumps(resp) + "\n")
        stdout.flush()
