"""Start heuristics for mixed-integer linear programs."""

from .heuristics import HeuristicOutcome, rounding, shifting, simple_rounding
from .model import MipInstance, optimality_gap, round_half
from .mps import parse_mps, read_mps
from .pump import PumpConfig, feasibility_pump
from .push import PushConfig, push

__version__ = "0.1.0"

__all__ = [
    "HeuristicOutcome", "rounding", "shifting", "simple_rounding", "MipInstance",
    "optimality_gap", "round_half", "parse_mps", "read_mps", "PumpConfig",
    "feasibility_pump", "PushConfig", "push",
]
