"""Exact feasibility checks for interim allocation rules and joint belief distributions."""

from .border import (
    FeasibilityVerdict,
    GameInstance,
    InterimRule,
    Witness,
    border_bruteforce,
    flow_feasibility,
    level_set_check,
)
from .beliefs import (
    TestingProfile,
    borderstar_bruteforce,
    borderstar_feasibility,
    construct_game,
)
from .measures import FiniteMeasure, Grid, rational

__version__ = "0.1.0"

__all__ = [
    "FeasibilityVerdict",
    "FiniteMeasure",
    "GameInstance",
    "Grid",
    "InterimRule",
    "TestingProfile",
    "Witness",
    "border_bruteforce",
    "borderstar_bruteforce",
    "borderstar_feasibility",
    "construct_game",
    "flow_feasibility",
    "level_set_check",
    "rational",
]
