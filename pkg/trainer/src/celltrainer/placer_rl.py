"""Graph-based placement policy: episodes place (PMOS, NMOS, pin) triples
left to right over the slot sequence; reward is the negative placement
cost, given at episode end. Supports imitation pre-training on annealer
placements followed by policy-gradient fine-tuning."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

import numpy as np
import torch

from .models import PlacerPolicy
from .scorelib import CostConfig, score_rep

ROLES = ("gate", "source", "drain", "pin")
NODE_DIM = 9   # type one-hot (P, N, pin) + dummy flag + fins + placed + flipped + last P/N
EDGE_DIM = len(ROLES) * len(ROLES)


@dataclass
class PlacementGraph:
    netlist: dict
    nodes: list = field(default_factory=list)   # (kind, index) with dummies
    edges: list = field(default_factory=list)   # (src, dst, role_src, role_dst)

    def __post_init__(self):
        devices = self.netlist["devices"]
        pins = self.netlist.get("pins", [])
        self.pmos = [i for i, d in enumerate(devices) if d["kind"].upper() == "PMOS"]
        self.nmos = [i for i, d in enumerate(devices) if d["kind"].upper() == "NMOS"]
        for i in range(len(devices)):
            self.nodes.append(("dev", i))
        for i in range(len(pins)):
            self.nodes.append(("pin", i))
        self.dummy_p = len(self.nodes)
        self.nodes.append(("dummy_p", None))
        self.dummy_n = len(self.nodes)
        self.nodes.append(("dummy_n", None))
        self.dummy_pin = len(self.nodes)
        self.nodes.append(("dummy_pin", None))
        attachments: dict = {}
        for i, d in enumerate(devices):
            for role in ("gate", "source", "drain"):
                attachments.setdefault(d[role], []).append((i, role))
        for i, p in enumerate(pins):
            attachments.setdefault(p["net"], []).append((len(devices) + i, "pin"))
        for members in attachments.values():
            for a, role_a in members:
                for b, role_b in members:
                    if a != b:  # both directions instantiated by iteration
                        self.edges.append((a, b, role_a, role_b))

    def tensors(self, state):
        devices = self.netlist["devices"]
        feats = np.zeros((len(self.nodes), NODE_DIM), dtype=np.float32)
        for idx, (kind, ref) in enumerate(self.nodes):
            if kind == "dev":
                d = devices[ref]
                feats[idx, 0 if d["kind"].upper() == "PMOS" else 1] = 1.0
                feats[idx, 4] = d.get("fins", 1) / 4.0
            elif kind == "pin":
                feats[idx, 2] = 1.0
            else:
                feats[idx, {"dummy_p": 0, "dummy_n": 1, "dummy_pin": 2}[kind]] = 1.0
                feats[idx, 3] = 1.0
            feats[idx, 5] = float(idx in state.placed)
            feats[idx, 7] = float(idx == state.last_p)
            feats[idx, 8] = float(idx == state.last_n)
        node_feats = torch.from_numpy(feats)
        if self.edges:
            ei = torch.tensor([[e[0] for e in self.edges],
                               [e[1] for e in self.edges]], dtype=torch.long)
            ea = torch.zeros((len(self.edges), EDGE_DIM))
            for k, (_a, _b, ra, rb) in enumerate(self.edges):
                ea[k, ROLES.index(ra) * len(ROLES) + ROLES.index(rb)] = 1.0
        else:
            ei = torch.zeros((2, 0), dtype=torch.long)
            ea = torch.zeros((0, EDGE_DIM))
        return node_feats, ei, ea


@dataclass
class EpisodeState:
    placed: set = field(default_factory=set)
    last_p: int = -1
    last_n: int = -1


def default_slots(netlist: dict) -> int:
    devices = netlist["devices"]
    n_p = sum(d["kind"].upper() == "PMOS" for d in devices)
    n_n = len(devices) - n_p
    base = max(n_p, n_n)
    return max(base + math.ceil(base / 4), len(netlist.get("pins", [])))


def _candidates(graph, state, kind, remaining_slots):
    """Unplaced nodes of the kind plus its dummy when capacity allows."""
    if kind == "P":
        real = [i for i, (k, r) in enumerate(graph.nodes)
                if k == "dev" and r in graph.pmos and i not in state.placed]
        dummy = graph.dummy_p
    elif kind == "N":
        real = [i for i, (k, r) in enumerate(graph.nodes)
                if k == "dev" and r in graph.nmos and i not in state.placed]
        dummy = graph.dummy_n
    else:
        real = [i for i, (k, _r) in enumerate(graph.nodes)
                if k == "pin" and i not in state.placed]
        dummy = graph.dummy_pin
    cands = list(real)
    if not real or len(real) < remaining_slots:
        cands.append(dummy)
    return cands


def greedy_flips(order_p, order_n, pmos, nmos, cfg: CostConfig):
    """Left-to-right flip choice minimizing the realized width."""
    from .scorelib import realize_columns
    flips_p = [False] * len(pmos)
    flips_n = [False] * len(nmos)
    for order, flips in ((order_p, flips_p), (order_n, flips_n)):
        for idx in [i for i in order if i is not None]:
            flips[idx] = True
            w_true = realize_columns(order_p, order_n, flips_p, flips_n, pmos, nmos, cfg)[1]
            flips[idx] = False
            w_false = realize_columns(order_p, order_n, flips_p, flips_n, pmos, nmos, cfg)[1]
            flips[idx] = w_true < w_false
    return flips_p, flips_n


def place_episode(netlist: dict, policy: PlacerPolicy, rng: random.Random,
                  n_slots: int | None = None, greedy: bool = False,
                  record=None):
    """Roll one placement episode; returns (rep dict, log-prob sum, value)."""
    graph = PlacementGraph(netlist)
    n = n_slots or default_slots(netlist)
    state = EpisodeState()
    devices = netlist["devices"]
    order_p: list = [None] * n
    order_n: list = [None] * n
    pin_slots: list = [None] * n
    logp_total = torch.zeros(())
    value = None
    for slot in range(n):
        for kind, order in (("P", order_p), ("N", order_n), ("pin", pin_slots)):
            cands = _candidates(graph, state, kind, n - slot)
            node_feats, ei, ea = graph.tensors(state)
            h = policy.embed(node_feats, ei, ea)
            if value is None:
                value = policy.value(h)
            last_p = state.last_p if state.last_p >= 0 else graph.dummy_p
            last_n = state.last_n if state.last_n >= 0 else graph.dummy_n
            logits = policy.action_logits(h, torch.tensor(cands), last_p, last_n)
            dist = torch.distributions.Categorical(logits=logits)
            if record is not None and (slot, kind) in record:
                pick = cands.index(record[(slot, kind)])
            elif greedy:
                pick = int(torch.argmax(logits)) if len(cands) > 1 else 0
            else:
                pick = int(dist.sample())
            logp_total = logp_total + dist.log_prob(torch.tensor(pick))
            chosen = cands[pick]
            kind_name, ref = graph.nodes[chosen]
            if kind_name == "dev":
                row = graph.pmos if kind == "P" else graph.nmos
                order[slot] = row.index(ref)
                state.placed.add(chosen)
                if kind == "P":
                    state.last_p = chosen
                else:
                    state.last_n = chosen
            elif kind_name == "pin":
                pin_slots[slot] = ref
                state.placed.add(chosen)
    pmos = [d for d in devices if d["kind"].upper() == "PMOS"]
    nmos = [d for d in devices if d["kind"].upper() == "NMOS"]
    flips_p, flips_n = greedy_flips(order_p, order_n, pmos, nmos, CostConfig())
    rep = {"format_version": 1, "order_p": order_p, "order_n": order_n,
           "flip_p": flips_p, "flip_n": flips_n, "pin_slots": pin_slots}
    return rep, logp_total, value


def teacher_actions(rep: dict, netlist: dict) -> dict:
    """Per-(slot, kind) node choices reproducing an annealer placement."""
    graph = PlacementGraph(netlist)
    devices = netlist["devices"]
    record = {}
    for slot in range(len(rep["order_p"])):
        ip, inn, pin = (rep["order_p"][slot], rep["order_n"][slot],
                        rep["pin_slots"][slot])
        record[(slot, "P")] = graph.pmos[ip] if ip is not None else graph.dummy_p
        record[(slot, "N")] = graph.nmos[inn] if inn is not None else graph.dummy_n
        record[(slot, "pin")] = (len(devices) + pin) if pin is not None else graph.dummy_pin
    return record


def imitation_loss(policy: PlacerPolicy, netlist: dict, rep: dict) -> torch.Tensor:
    """Negative log-likelihood of the teacher's action sequence."""
    record = teacher_actions(rep, netlist)
    _rep, logp, _v = place_episode(netlist, policy, random.Random(0),
                                   n_slots=len(rep["order_p"]), record=record)
    return -logp


def train_placer(cells_with_reps, epochs: int = 30, lr: float = 3e-3,
                 finetune_episodes: int = 0, seed: int = 0, log=print):
    """Imitation pre-training on (netlist, rep) pairs, then optional
    REINFORCE fine-tuning with the value head as baseline."""
    torch.manual_seed(seed)
    policy = PlacerPolicy(NODE_DIM, EDGE_DIM)
    optimizer = torch.optim.Adam(policy.parameters(), lr=lr)
    curve = []
    for epoch in range(epochs):
        total = torch.zeros(())
        for netlist, rep in cells_with_reps:
            total = total + imitation_loss(policy, netlist, rep)
        optimizer.zero_grad()
        total.backward()
        optimizer.step()
        curve.append(total.item())
        log(json.dumps({"epoch": epoch, "imitation_nll": total.item()}))
    rng = random.Random(seed)
    for ep in range(finetune_episodes):
        netlist, _rep = cells_with_reps[ep % len(cells_with_reps)]
        rep, logp, value = place_episode(netlist, policy, rng)
        reward = -score_rep(rep, netlist)
        advantage = reward - float(value)
        loss = -logp * advantage + (value - torch.tensor(reward)) ** 2
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    return policy, curve
