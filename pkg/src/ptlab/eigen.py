"""Certified dense eigendecomposition and conjugate-pair analysis of spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .opalg import LinearOp, max_abs_norm

__all__ = [
    "EigenError",
    "EigenPair",
    "Spectrum",
    "PairingReport",
    "eigendecompose",
    "pt_real_form",
    "conjugate_pair_matching",
    "MAX_DIM",
]

MAX_DIM = 1000
PT_STRUCTURE_TOL = 1e-12


class EigenError(RuntimeError):
    """Solver failure; ``indices`` lists eigenpairs that did not certify."""

    def __init__(self, message: str, indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.indices = indices


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray = field(repr=False)
    residual: float


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by real part, then imaginary part.

    ``norm`` is the max-abs entry of the decomposed matrix, the scale that
    all tolerances here are relative to. ``basis_condition`` is the 2-norm
    condition number of the eigenvector matrix; a huge value flags a
    (numerically) defective matrix. ``method`` records which solver path
    produced the pairs.
    """

    pairs: tuple[EigenPair, ...]
    norm: float
    basis_condition: float
    method: str = "general"

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs], dtype=complex)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([p.residual for p in self.pairs])

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PairingReport:
    pairs: tuple[tuple[int, int], ...]
    real: tuple[int, ...]
    unmatched: tuple[int, ...]
    tolerance: float

    def partner(self, n: int) -> np.ndarray:
        """Partner index per eigenvalue: -1 real/self, -2 unmatched."""
        out = np.full(n, -2, dtype=int)
        out[list(self.real)] = -1
        for i, j in self.pairs:
            out[i] = j
            out[j] = i
        return out


def pt_real_form(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Unitary ``U`` and ``W = U^dagger M U`` for the index-reversal PT map.

    If ``R conj(M) R == M`` with ``R`` the reversal permutation, then with
    ``U = (I + iR)/sqrt(2)`` the matrix ``W`` is real. Returns
    ``(U, W, defect)`` where ``defect`` is ``max|Im W| / max(1, max|W|)``.
    """
    n = m.shape[0]
    r = np.eye(n)[::-1]
    u = (np.eye(n) + 1j * r) / np.sqrt(2.0)
    w = u.conj().T @ m @ u
    defect = max_abs_norm(w.imag) / max(1.0, max_abs_norm(w))
    return u, w, defect


def eigendecompose(h, tol: float = 1e-10, structure: str = "auto") -> Spectrum:
    """All eigenpairs of a dense complex matrix, each residual-certified.

    ``structure="auto"`` first tests for exact PT symmetry under index
    reversal (defect at most ``PT_STRUCTURE_TOL``). Such matrices are
    unitarily similar to a real matrix, which is diagonalized with the real
    Hessenberg-QR driver (``dgeev``); its complex eigenvalues come out in
    exact conjugate pairs, and its backward error is itself PT-symmetric.
    Everything else, or ``structure="general"``, goes to ``zgeev``.

    Every pair must satisfy ``|H v - lambda v|_2 <= tol * max(1, |H|)``
    against the original matrix, or :class:`EigenError` is raised naming
    the offending indices.
    """
    if structure not in ("auto", "general"):
        raise ValueError(f"unknown structure {structure!r}")
    m = h.matrix if isinstance(h, LinearOp) else np.asarray(h, dtype=complex)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds desk-scale limit {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    method = "general"
    try:
        if structure == "auto" and n > 0:
            u, w_real, defect = pt_real_form(m)
            if defect <= PT_STRUCTURE_TOL:
                method = "pt-real"
                w, v = np.linalg.eig(w_real.real)
                v = u @ v
        if method == "general":
            w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge: {exc}") from exc
    w = w.astype(complex)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    residuals = np.linalg.norm(m @ v - v * w, axis=0)
    scale = max(1.0, max_abs_norm(m))
    bad = tuple(int(k) for k in np.nonzero(~(residuals <= tol * scale))[0])
    if bad:
        raise EigenError(f"{len(bad)} eigenpair(s) failed the residual bound", bad)
    with np.errstate(over="ignore", divide="ignore"):
        cond = float(np.linalg.cond(v)) if n else 1.0
    pairs = tuple(
        EigenPair(value=complex(w[k]), vector=v[:, k].copy(), residual=float(residuals[k]))
        for k in range(n)
    )
    return Spectrum(pairs=pairs, norm=max_abs_norm(m), basis_condition=cond, method=method)


def conjugate_pair_matching(spectrum, tol: float = 1e-8, scale: float | None = None) -> PairingReport:
    """Match each eigenvalue to one close to its complex conjugate.

    Eigenvalues with ``|Im| <= tol * max(1, scale)`` are real (self-paired).
    The rest are paired greedily by increasing ``|mu - conj(lambda)|``,
    accepting distances up to the same bound. ``spectrum`` may be a
    :class:`Spectrum` or a plain sequence of complex numbers; ``scale``
    defaults to the spectrum's matrix norm (or 1 for plain sequences).
    """
    if isinstance(spectrum, Spectrum):
        values = spectrum.values
        scale = spectrum.norm if scale is None else scale
    else:
        values = np.asarray(list(spectrum), dtype=complex)
        scale = 1.0 if scale is None else scale
    bound = tol * max(1.0, float(scale))
    real = [k for k in range(len(values)) if abs(values[k].imag) <= bound]
    rest = [k for k in range(len(values)) if abs(values[k].imag) > bound]
    candidates = []
    for a in range(len(rest)):
        for b in range(a + 1, len(rest)):
            i, j = rest[a], rest[b]
            d = abs(values[j] - np.conj(values[i]))
            if d <= bound:
                candidates.append((d, i, j))
    candidates.sort()
    used: set[int] = set()
    pairs = []
    for _, i, j in candidates:
        if i in used or j in used:
            continue
        used.update((i, j))
        pairs.append((i, j))
    unmatched = tuple(k for k in rest if k not in used)
    return PairingReport(pairs=tuple(sorted(pairs)), real=tuple(real), unmatched=unmatched, tolerance=bound)
