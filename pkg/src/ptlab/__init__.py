"""Numerical laboratory for symmetry identities of 1D Hamiltonians with complex potentials."""

from .eigen import Spectrum, conjugate_pair_matching, eigendecompose
from .expr import evaluate, format_expr, free_params, parse
from .grid import Grid, cumulative_integral, make_grid, reflect
from .model import HamiltonianSystem, PotentialSpec, build_system
from .opalg import AntilinearOp, LinearOp, adjoint, compose, inverse, similarity, time_reversal

__version__ = "0.1.0"

__all__ = [
    "AntilinearOp",
    "Grid",
    "HamiltonianSystem",
    "LinearOp",
    "PotentialSpec",
    "Spectrum",
    "adjoint",
    "build_system",
    "compose",
    "conjugate_pair_matching",
    "cumulative_integral",
    "eigendecompose",
    "evaluate",
    "format_expr",
    "free_params",
    "inverse",
    "make_grid",
    "parse",
    "reflect",
    "similarity",
    "time_reversal",
]
