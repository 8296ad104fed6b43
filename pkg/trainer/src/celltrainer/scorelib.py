"""Trainer-side placement cost: the reward function of the placement MDP.

Mirrors the layout tool's scan semantics (left-to-right columns, dummy-poly
gaps on fin mismatch or broken diffusion sharing, max-combined) plus the
width/congestion/violation weighted sum; `celltrainer place` scores are
cross-checked against the layout tool's reported scores in tests.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CostConfig:
    k_s: int = 1
    k_f: int = 1
    w_width: float = 1.0
    w_cong: float = 0.5
    w_viol: float = 10.0
    alpha: float = 0.5


def _gap(devs_a, devs_b, cfg):
    (da, fa), (db, fb) = devs_a, devs_b
    if da is None or db is None:
        return 0
    gap = cfg.k_f if da["fins"] != db["fins"] else 0
    right = da["source"] if fa else da["drain"]
    left = db["drain"] if fb else db["source"]
    if right != left:
        gap = max(gap, cfg.k_s)
    return gap


def realize_columns(order_p, order_n, flips_p, flips_n, pmos, nmos, cfg: CostConfig):
    """Per-slot columns and the device-only width."""
    n = len(order_p)
    cols = []
    x = 0
    for k in range(n):
        cols.append(x)
        if k + 1 < n:
            pa = (pmos[order_p[k]], flips_p[order_p[k]]) if order_p[k] is not None else (None, False)
            pb = (pmos[order_p[k + 1]], flips_p[order_p[k + 1]]) if order_p[k + 1] is not None else (None, False)
            na = (nmos[order_n[k]], flips_n[order_n[k]]) if order_n[k] is not None else (None, False)
            nb = (nmos[order_n[k + 1]], flips_n[order_n[k + 1]]) if order_n[k + 1] is not None else (None, False)
            x += 1 + max(_gap(pa, pb, cfg), _gap(na, nb, cfg))
    used = [cols[k] for k in range(n)
            if order_p[k] is not None or order_n[k] is not None]
    return cols, (1 + max(used)) if used else 1


def score_rep(rep: dict, netlist: dict, cfg: CostConfig = CostConfig()) -> float:
    """Weighted width + congestion + gate violations for a representation
    in the layout tool's placement JSON shape."""
    pmos = [d for d in netlist["devices"] if d["kind"].upper() == "PMOS"]
    nmos = [d for d in netlist["devices"] if d["kind"].upper() == "NMOS"]
    cols, width = realize_columns(rep["order_p"], rep["order_n"],
                                  rep["flip_p"], rep["flip_n"], pmos, nmos, cfg)
    spans: dict = {}

    def touch(net, col):
        lo, hi = spans.get(net, (col, col))
        spans[net] = (min(lo, col), max(hi, col))

    for order, devs in ((rep["order_p"], pmos), (rep["order_n"], nmos)):
        for k, idx in enumerate(order):
            if idx is not None:
                for term in ("gate", "source", "drain"):
                    touch(devs[idx][term], cols[k])
    pins = netlist.get("pins", [])
    for k, pin in enumerate(rep.get("pin_slots", [])):
        if pin is not None:
            touch(pins[pin]["net"], min(max(cols[k], 0), width - 1))

    counts = [sum(1 for lo, hi in spans.values() if lo <= b - 1 and hi >= b)
              for b in range(1, width)]
    cong = 0.0
    if counts:
        cong = cfg.alpha * max(counts) + (1 - cfg.alpha) * sum(counts) / len(counts)
    viol = sum(1 for ip, inn in zip(rep["order_p"], rep["order_n"])
               if ip is not None and inn is not None
               and pmos[ip]["gate"] != nmos[inn]["gate"])
    return cfg.w_width * width + cfg.w_cong * cong + cfg.w_viol * viol
