"""Dense linear and antilinear operators on C^N.

An antilinear operator is stored as a single matrix ``M`` acting as
``psi -> M @ conj(psi)``. With that convention the four composition rules
close, the adjoint of an antilinear operator is ``M.T`` and its inverse is
``conj(inv(M))``.
"""

from __future__ import annotations

import warnings
from typing import Union

import numpy as np
import scipy.linalg

__all__ = [
    "OperatorError",
    "SingularOperatorError",
    "LinearOp",
    "AntilinearOp",
    "Operator",
    "time_reversal",
    "identity",
    "compose",
    "adjoint",
    "inverse",
    "similarity",
    "max_abs_norm",
    "is_hermitian",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


class OperatorError(ValueError):
    pass


class SingularOperatorError(OperatorError):
    pass


def _freeze(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OperatorError(f"operator matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise OperatorError("operator matrix has non-finite entries")
    m.setflags(write=False)
    return m


class _Op:
    antilinear: bool = False
    __slots__ = ("matrix",)

    def __init__(self, matrix):
        self.matrix = _freeze(matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, psi) -> np.ndarray:
        psi = np.asarray(psi)
        return self.matrix @ (np.conj(psi) if self.antilinear else psi)

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, _Op):
            return NotImplemented
        return compose(self, other)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, _Op)
            and self.antilinear == other.antilinear
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class LinearOp(_Op):
    """``psi -> M @ psi``."""

    antilinear = False
    __slots__ = ()


class AntilinearOp(_Op):
    """``psi -> M @ conj(psi)``; time reversal is ``AntilinearOp(I)``."""

    antilinear = True
    __slots__ = ()


Operator = Union[LinearOp, AntilinearOp]


def _kind(antilinear: bool):
    return AntilinearOp if antilinear else LinearOp


def identity(n: int) -> LinearOp:
    return LinearOp(np.eye(n))


def time_reversal(n: int) -> AntilinearOp:
    return AntilinearOp(np.eye(n))


def compose(a: Operator, b: Operator) -> Operator:
    """Operator product ``a o b`` (apply ``b`` first).

    The result is antilinear iff exactly one factor is. An antilinear left
    factor conjugates the right factor's matrix.
    """
    if a.dim != b.dim:
        raise OperatorError(f"dimension mismatch: {a.dim} vs {b.dim}")
    right = np.conj(b.matrix) if a.antilinear else b.matrix
    return _kind(a.antilinear ^ b.antilinear)(a.matrix @ right)


def adjoint(a: Operator) -> Operator:
    """Adjoint under ``<phi, A psi> = <psi, A^dagger phi>`` for antilinear ``A``."""
    if a.antilinear:
        return AntilinearOp(a.matrix.T)
    return LinearOp(a.matrix.conj().T)


def _monomial_inverse(m: np.ndarray) -> np.ndarray | None:
    # one nonzero per row and column (diagonal/permutation products) invert entrywise
    nz = m != 0
    if not (np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1)):
        return None
    rows, cols = np.nonzero(nz)
    with np.errstate(over="ignore"):
        vals = 1.0 / m[rows, cols]
    if not np.all(np.isfinite(vals)):
        raise SingularOperatorError("inverse overflows")
    inv = np.zeros_like(m)
    inv[cols, rows] = vals
    return inv


def _matrix_inverse(m: np.ndarray) -> np.ndarray:
    inv = _monomial_inverse(m)
    if inv is not None:
        return inv
    n = m.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
        gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
        anorm = np.abs(m).sum(axis=0).max()
        if anorm == 0:
            raise SingularOperatorError("matrix is zero")
        rcond, info = gecon(lu, anorm, norm="1")
        if info != 0 or not rcond > 1.0 / COND_LIMIT:
            cond = np.inf if rcond == 0 else 1.0 / rcond
            raise SingularOperatorError(f"matrix is singular or ill-conditioned (cond ~ {cond:.3g})")
        return scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)


def inverse(a: Operator) -> Operator:
    """Inverse with ``compose(a, inverse(a)) == identity``.

    Matrices with exactly one nonzero per row and column are inverted
    entrywise. Anything else goes through LU with partial pivoting and is
    rejected when the 1-norm condition estimate exceeds ``COND_LIMIT``.
    """
    inv = _matrix_inverse(a.matrix)
    if a.antilinear:
        return AntilinearOp(np.conj(inv))
    return LinearOp(inv)


def similarity(a: Operator, h: LinearOp) -> LinearOp:
    """``a o h o a^-1``; for antilinear ``a = M`` this is ``M conj(H) M^-1``."""
    if h.antilinear:
        raise OperatorError("similarity expects a linear operator in the middle")
    return compose(compose(a, h), inverse(a))


def max_abs_norm(m) -> float:
    m = m.matrix if isinstance(m, _Op) else np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def is_hermitian(a: Operator, tol: float = 1e-12) -> tuple[bool, float]:
    """Return ``(ok, residual)`` with the residual relative to ``max(1, |M|)``.

    For antilinear operators Hermiticity means complex symmetry, ``M == M.T``.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    residual = max_abs_norm(a.matrix - adjoint(a).matrix) / max(1.0, max_abs_norm(a.matrix))
    return residual <= tol, residual
