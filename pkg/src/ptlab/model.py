"""Discretized Hamiltonian ``(p - A)^2 / 2m + V`` and its symmetry operators.

Momentum is the 3-point central difference with Dirichlet truncation,
``D = -i S / 2h``. Its entries are purely imaginary and antisymmetric, so
``conj(D) == -D`` and ``R D R == -D`` hold exactly; that is what makes the
parity/time-reversal identities machine-exact at the matrix level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .expr import EvaluationError, Expr, evaluate_on, free_params, parse
from .grid import Grid, cumulative_integral
from .opalg import AntilinearOp, LinearOp, compose, time_reversal

__all__ = [
    "ModelError",
    "PotentialSpec",
    "HamiltonianSystem",
    "sample_potentials",
    "build_momentum",
    "build_parity",
    "build_hamiltonian",
    "build_tau",
    "build_eta",
    "gauge_phases",
    "tau_from_gauge",
    "eta_from_phase",
    "pt_transform",
    "build_system",
]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """Scalar potential ``V``, vector potential ``A``, mass and parameter bindings.

    Expressions may be given as source strings; they are parsed on construction.
    """

    V: Union[Expr, str] = "0"
    A: Union[Expr, str] = "0"
    mass: float = 0.5
    params: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("V", "A"):
            value = getattr(self, name)
            if isinstance(value, str):
                object.__setattr__(self, name, parse(value))
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ModelError(f"mass must be positive, got {self.mass!r}")
        object.__setattr__(self, "params", {k: complex(v) for k, v in self.params.items()})
        missing = (free_params(self.V) | free_params(self.A)) - set(self.params)
        if missing:
            raise ModelError(f"unbound parameters: {', '.join(sorted(missing))}")


def sample_potentials(spec: PotentialSpec, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A(x_j), V(x_j))`` sampled on the grid."""
    try:
        a = evaluate_on(spec.A, grid.x, spec.params)
    except EvaluationError as exc:
        raise ModelError(f"vector potential A: {exc}") from exc
    try:
        v = evaluate_on(spec.V, grid.x, spec.params)
    except EvaluationError as exc:
        raise ModelError(f"scalar potential V: {exc}") from exc
    return a, v


def build_momentum(grid: Grid) -> LinearOp:
    n = grid.n_points
    d = np.zeros((n, n), dtype=complex)
    step = 1.0 / (2.0 * grid.h)
    idx = np.arange(n - 1)
    d[idx, idx + 1] = complex(0.0, -step)
    d[idx + 1, idx] = complex(0.0, step)
    return LinearOp(d)


def build_parity(grid: Grid) -> LinearOp:
    return LinearOp(np.eye(grid.n_points)[::-1])


def _hamiltonian(d: np.ndarray, a: np.ndarray, v: np.ndarray, mass: float) -> np.ndarray:
    b = d - np.diag(a)
    with np.errstate(over="ignore", invalid="ignore"):
        h = (b @ b) / (2.0 * mass) + np.diag(v)
    return h


def build_hamiltonian(spec: PotentialSpec, grid: Grid) -> LinearOp:
    """Explicit matrix ``(D - diag A)(D - diag A) / 2m + diag V``."""
    a, v = sample_potentials(spec, grid)
    h = _hamiltonian(build_momentum(grid).matrix, a, v, spec.mass)
    _check_finite(h, grid, "Hamiltonian")
    return LinearOp(h)


def _check_finite(m: np.ndarray, grid: Grid, what: str) -> None:
    bad = ~np.isfinite(m)
    if bad.any():
        j = int(np.nonzero(bad)[0][0])
        raise ModelError(f"{what} overflows at x[{j}]={grid.x[j]!r}")


def gauge_phases(a: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """``alpha = -2 int_0^x A`` and ``beta = 2 int_0^x conj(A)``.

    ``beta == -conj(alpha)`` bitwise, because the quadrature weights are real.
    """
    prim = cumulative_integral(grid, a)
    alpha = -2.0 * prim
    beta = 2.0 * cumulative_integral(grid, np.conj(a))
    return alpha, beta


def _phase_factor(phase: np.ndarray, grid: Grid, what: str) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        factor = np.exp(1j * phase)
    if not np.all(np.isfinite(factor)):
        j = int(np.nonzero(~np.isfinite(factor))[0][0])
        raise ModelError(f"{what} overflows at x[{j}]={grid.x[j]!r} (unbounded imaginary gauge)")
    if np.any(factor == 0):
        j = int(np.nonzero(factor == 0)[0][0])
        raise ModelError(f"{what} underflows to zero at x[{j}]={grid.x[j]!r}")
    return factor


def tau_from_gauge(alpha: np.ndarray, grid: Grid) -> AntilinearOp:
    """``T o diag(exp(i alpha))``, i.e. ``AntilinearOp(diag(exp(-i conj(alpha))))``."""
    factor = _phase_factor(alpha, grid, "exp(i*alpha)")
    return compose(time_reversal(grid.n_points), LinearOp(np.diag(factor)))


def eta_from_phase(beta: np.ndarray, grid: Grid) -> LinearOp:
    factor = _phase_factor(beta, grid, "exp(i*beta)")
    return compose(LinearOp(np.diag(factor)), build_parity(grid))


def build_tau(spec: PotentialSpec, grid: Grid) -> AntilinearOp:
    a, _ = sample_potentials(spec, grid)
    alpha, _ = gauge_phases(a, grid)
    return tau_from_gauge(alpha, grid)


def build_eta(spec: PotentialSpec, grid: Grid) -> LinearOp:
    a, _ = sample_potentials(spec, grid)
    _, beta = gauge_phases(a, grid)
    return eta_from_phase(beta, grid)


def pt_transform(h: LinearOp, grid: Grid) -> LinearOp:
    """``R conj(H) R``, the action of the antilinear map ``PT`` by conjugation."""
    if h.dim != grid.n_points:
        raise ModelError(f"dimension mismatch: operator {h.dim}, grid {grid.n_points}")
    return LinearOp(np.conj(h.matrix)[::-1, ::-1])


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    spec: PotentialSpec
    grid: Grid
    A: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    momentum: LinearOp = field(repr=False)
    H: LinearOp = field(repr=False)
    H_dagger: LinearOp = field(repr=False)
    tau: AntilinearOp = field(repr=False)
    eta: LinearOp = field(repr=False)
    parity: LinearOp = field(repr=False)
    time_reversal: AntilinearOp = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    @property
    def vanishing_gauge(self) -> bool:
        return not np.any(self.A)


def build_system(spec: PotentialSpec, grid: Grid) -> HamiltonianSystem:
    """Sample the potentials once and assemble every operator on ``grid``."""
    a, v = sample_potentials(spec, grid)
    d = build_momentum(grid)
    h = _hamiltonian(d.matrix, a, v, spec.mass)
    _check_finite(h, grid, "Hamiltonian")
    alpha, beta = gauge_phases(a, grid)
    h_op = LinearOp(h)
    for arr in (a, v, alpha, beta):
        arr.setflags(write=False)
    return HamiltonianSystem(
        spec=spec,
        grid=grid,
        A=a,
        V=v,
        momentum=d,
        H=h_op,
        H_dagger=LinearOp(h.conj().T),
        tau=tau_from_gauge(alpha, grid),
        eta=eta_from_phase(beta, grid),
        parity=build_parity(grid),
        time_reversal=time_reversal(grid.n_points),
        alpha=alpha,
        beta=beta,
    )
