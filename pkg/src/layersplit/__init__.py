"""Intrinsic / artifact layer separation for block-compressed images and video."""
from .kernels import BACKEND
from .solver import DivergenceError, SolveResult, SolverConfig, SolverState, solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DivergenceError",
    "SolveResult",
    "SolverConfig",
    "SolverState",
    "solve",
]
