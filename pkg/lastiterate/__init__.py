"""
lastiterate: payoff-perturbed and optimistic learning dynamics for monotone games.
"""

from .algorithms import ConstantSchedule, NoisyTheorySchedule, Run, SolverKind, run
from .games import (
    GameSpec,
    StrategyProfile,
    build_cournot,
    build_hard_game,
    build_random_payoff,
)
from .geometry import Box, Simplex, gap, tangent_residual

__all__ = [
    "Box",
    "ConstantSchedule",
    "GameSpec",
    "NoisyTheorySchedule",
    "Run",
    "Simplex",
    "SolverKind",
    "StrategyProfile",
    "build_cournot",
    "build_hard_game",
    "build_random_payoff",
    "gap",
    "run",
    "tangent_residual",
]
