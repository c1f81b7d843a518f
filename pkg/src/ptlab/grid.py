"""Symmetric uniform grid on [-L, L] and the trapezoid primitive anchored at 0."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "GridError", "make_grid", "reflect", "cumulative_integral"]


class GridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    """Odd number of nodes, exactly mirror-symmetric about the centre node.

    Indices are 0-based: ``x[center] == 0.0`` and ``x[n - 1 - j] == -x[j]``.
    """

    half_width: float
    n_points: int
    x: np.ndarray = field(repr=False)
    h: float

    @property
    def center(self) -> int:
        return self.n_points // 2

    def __len__(self) -> int:
        return self.n_points


def make_grid(half_width: float, n_points: int) -> Grid:
    """Build the grid with spacing ``h = 2 L / (N - 1)``.

    Nodes right of the centre are ``k * h``; the left half is their exact
    negation, so reflection symmetry holds bitwise.
    """
    if isinstance(n_points, bool) or int(n_points) != n_points:
        raise GridError(f"grid_points must be an integer, got {n_points!r}")
    n_points = int(n_points)
    half_width = float(half_width)
    if not np.isfinite(half_width) or half_width <= 0:
        raise GridError(f"half_width must be positive and finite, got {half_width!r}")
    if n_points < 5:
        raise GridError(f"grid_points must be at least 5, got {n_points}")
    if n_points % 2 == 0:
        raise GridError(f"grid_points must be odd so that x=0 is a node, got {n_points}")
    h = 2.0 * half_width / (n_points - 1)
    m = n_points // 2
    right = np.arange(m + 1, dtype=float) * h
    right[-1] = half_width
    x = np.concatenate([-right[:0:-1], right])
    x.setflags(write=False)
    return Grid(half_width=half_width, n_points=n_points, x=x, h=h)


def reflect(j: int, n_points: int) -> int:
    """Index of the mirror node of ``j`` (0-based): ``n_points - 1 - j``."""
    if not 0 <= j < n_points:
        raise IndexError(f"index {j} out of range for {n_points} points")
    return n_points - 1 - j


def cumulative_integral(grid: Grid, f) -> np.ndarray:
    """Trapezoid approximation of ``F(x_j) = integral of f from 0 to x_j``.

    Accumulates outward from the centre node in both directions with the
    same operation order, so an even integrand gives an exactly odd ``F``
    and conjugation commutes with the rule exactly.
    """
    f = np.asarray(f)
    if f.shape != (grid.n_points,):
        raise GridError(f"expected {grid.n_points} samples, got shape {f.shape}")
    c = grid.center
    half_h = grid.h / 2
    out = np.zeros(grid.n_points, dtype=np.result_type(f.dtype, float))
    # increments ordered outward: (f[c] + f[c+k]) pairs mirror (f[c] + f[c-k])
    right = (f[c:-1] + f[c + 1:]) * half_h
    left = (f[c:0:-1] + f[c - 1::-1]) * half_h
    out[c + 1:] = np.cumsum(right)
    out[:c] = -np.cumsum(left)[::-1]
    return out
