"""Technology parameters and the synthetic design-rule set.

The rule set is deliberately small: cut spacing on a track, cut adjacency
across tracks, and a minimum segment length on M1, plus shorts. Cut
positions on adjacent tracks are coupled, so fixing a violation may require
adding metal elsewhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict, replace

from .errors import CellgenError

FINS_MAX = 4


@dataclass(frozen=True)
class DrcRuleSet:
    min_cut_spacing: int = 2
    cut_adjacency_window: int = 1
    min_segment_len: int = 2

    def __post_init__(self):
        for name in ("min_cut_spacing", "cut_adjacency_window", "min_segment_len"):
            if getattr(self, name) < 1:
                raise CellgenError(f"drc rule {name} must be >= 1")


@dataclass(frozen=True)
class ScoreWeights:
    w_width: float = 1.0
    w_cong: float = 0.5
    w_viol: float = 10.0

    def __post_init__(self):
        for name in ("w_width", "w_cong", "w_viol"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise CellgenError(f"score weight {name} must be finite and >= 0")


@dataclass(frozen=True)
class TechParams:
    k_s: int = 1                      # dummy polys between non-sharing neighbours
    k_f: int = 1                      # dummy polys between fin-mismatched neighbours
    grid_height: int = 8              # routing tracks per cell (fixed per library)
    max_width: int = 64               # upper bound on poly columns
    reward_step: float = -0.1         # per-step reward in the fix environment
    reward_drc_coeff: float = 1.0     # reward per removed DRC marker
    score_weights: ScoreWeights = field(default_factory=ScoreWeights)
    drc_rules: DrcRuleSet = field(default_factory=DrcRuleSet)
    congestion_alpha: float = 0.5     # max-vs-mean blend in the crossing estimate
    penalty_soft: float = 25.0        # placement penalty for "routable with DRCs"
    penalty_hard: float = 1000.0      # placement penalty for "not routable"
    step_cost: int = 1                # maze router in-layer step on metal
    li_step_cost: int = 2             # step on LISD/LIG (resistive, discouraged)
    via_cost: int = 2                 # maze router layer change

    def __post_init__(self):
        if self.grid_height < 4:
            raise CellgenError("grid_height must be >= 4")
        if not (0 <= self.k_s <= 4 and 0 <= self.k_f <= 4):
            raise CellgenError("k_s and k_f must be in [0, 4]")
        if self.reward_step >= 0:
            raise CellgenError("reward_step must be negative")
        if self.reward_drc_coeff <= 0:
            raise CellgenError("reward_drc_coeff must be positive")
        for name in ("congestion_alpha", "penalty_soft", "penalty_hard"):
            if not math.isfinite(getattr(self, name)):
                raise CellgenError(f"{name} must be finite")

    def with_rules(self, **kw) -> "TechParams":
        return replace(self, drc_rules=replace(self.drc_rules, **kw))

    def to_json(self) -> dict:
        d = asdict(self)
        d["format_version"] = 1
        return d

    @staticmethod
    def from_json(d: dict) -> "TechParams":
        d = dict(d)
        d.pop("format_version", None)
        if "score_weights" in d:
            d["score_weights"] = ScoreWeights(**d["score_weights"])
        if "drc_rules" in d:
            d["drc_rules"] = DrcRuleSet(**d["drc_rules"])
        return TechParams(**d)


def default_tech() -> TechParams:
    return TechParams()


def load_tech(path=None) -> TechParams:
    """Load a TechParams JSON config, or the built-in defaults."""
    if path is None:
        return default_tech()
    with open(path) as f:
        return TechParams.from_json(json.load(f))


def save_tech(tech: TechParams, path) -> None:
    with open(path, "w") as f:
        json.dump(tech.to_json(), f, indent=2, sort_keys=True)
        f.write("\n")
