"""Standard-cell layout synthesis on a gridded stick abstraction."""

from .tech import TechParams, DrcRuleSet, ScoreWeights, default_tech, load_tech
from .netlist import Device, Pin, Netlist, make_netlist, parse_netlist, serialize_netlist
from .placement import (PlacementRep, RealizedPlacement, initial_rep,
                        realize_placement, gate_violations)
from .grid import LayoutGrid, build_grid
from .drc import DrcMarker, infer_cuts, check_drc, check_connectivity
from .annealer import Move, anneal, apply, congestion, propose, score
from .router import TerminalPair, Route, maze_route, terminal_pairs
from .ga import RoutingSolution, crossover, evolve, fitness, mutate, select_parents
from .fixenv import DrcFixEnv, StepResult, action_mask, greedy_fix
from .policy import POLICY_MANIFEST, policy_forward
from .routability import ROUTABILITY_MANIFEST, extract_features, predict

__version__ = "0.1.0"
