"""
Dense matrix kernel: eigenvalues, ordered real Schur form, Sylvester
solves and norms.

Everything here is a thin, validating layer over LAPACK as exposed by
scipy.linalg. Inputs are never modified; results are fresh arrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

# Relative tolerance used by default for "on the imaginary axis" / "stable"
# predicates, scaled by the magnitude of each eigenvalue.
DEFAULT_AXIS_RTOL = 1e-8


class MatrixError(ValueError):
    """Shape or argument error."""


class ConvergenceError(RuntimeError):
    """A LAPACK routine failed to converge or to reorder."""


@dataclass(frozen=True)
class SchurForm:
    """
    Real Schur decomposition M = Q T Q^T with the selected eigenvalues in
    the leading block. `selected` is the size of that block.
    """

    Q: np.ndarray
    T: np.ndarray
    eigenvalues: np.ndarray
    selected: int

    def reconstruct(self) -> np.ndarray:
        return self.Q @ self.T @ self.Q.T


def as_real_matrix(M, name: str = "M") -> np.ndarray:
    arr = np.array(M, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise MatrixError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixError(f"{name} contains non-finite entries")
    return arr


def _require_square(M: np.ndarray, name: str = "M") -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise MatrixError(f"{name} must be square, got shape {M.shape}")


def spectral_norm(M) -> float:
    """Largest singular value (0 for empty matrices)."""
    arr = np.asarray(M)
    if arr.size == 0:
        return 0.0
    return float(linalg.norm(arr, 2))


def frobenius_norm(M) -> float:
    arr = np.asarray(M)
    if arr.size == 0:
        return 0.0
    return float(linalg.norm(arr, "fro"))


def axis_band(vals, rtol: float = DEFAULT_AXIS_RTOL) -> np.ndarray:
    """Per-eigenvalue band rtol (1 + |lam|) around the real or imaginary axis."""
    return rtol * (1.0 + np.abs(np.asarray(vals)))


def eigenvalues(M) -> np.ndarray:
    """
    All eigenvalues of a real square matrix. Complex values come in
    conjugate pairs; the order is whatever LAPACK returns.
    """
    arr = np.asarray(M, dtype=float)
    _require_square(arr)
    if arr.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        vals = linalg.eigvals(arr, check_finite=True)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue computation failed: {exc}") from exc
    return np.asarray(vals, dtype=complex)


def _check_pairs(vals: np.ndarray, select: Callable[[complex], bool], band: np.ndarray) -> None:
    for lam, tol in zip(vals, band):
        if abs(lam.imag) <= tol:
            continue
        if bool(select(lam)) != bool(select(np.conj(lam))):
            raise MatrixError(f"selection splits the conjugate pair {lam:.6g} / {np.conj(lam):.6g}")


def real_schur(M, select: Callable[[complex], bool]) -> SchurForm:
    """
    Ordered real Schur form: eigenvalues with select(lam) true occupy the
    leading diagonal blocks. 2x2 blocks are never split.
    """
    arr = np.asarray(M, dtype=float)
    _require_square(arr)
    n = arr.shape[0]
    if n == 0:
        empty = np.zeros((0, 0))
        return SchurForm(Q=empty, T=empty, eigenvalues=np.zeros(0, dtype=complex), selected=0)

    vals = eigenvalues(arr)
    _check_pairs(vals, select, axis_band(vals))

    def sort_fn(re, im):
        return bool(select(complex(re, im)))

    try:
        T, Q, sdim = linalg.schur(arr, output="real", sort=sort_fn)
    except (linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"ordered Schur decomposition failed: {exc}") from exc

    diag_vals = _block_eigenvalues(T)
    expected = int(sum(bool(select(lam)) for lam in diag_vals))
    if sdim != expected:
        raise ConvergenceError(
            f"Schur reordering left {expected - sdim} selected eigenvalue(s) outside the leading block"
        )

    logger.debug("real_schur: n=%d, selected=%d", n, sdim)
    return SchurForm(Q=Q, T=T, eigenvalues=diag_vals, selected=int(sdim))


def _block_eigenvalues(T: np.ndarray) -> np.ndarray:
    """Eigenvalues of a quasi-triangular matrix read off its diagonal blocks."""
    n = T.shape[0]
    out = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            block = T[i:i + 2, i:i + 2]
            out.extend(np.linalg.eigvals(block))
            i += 2
        else:
            out.append(complex(T[i, i]))
            i += 1
    return np.asarray(out, dtype=complex)


def solve_sylvester(A, B, C, sep_rtol: float = 1e-12) -> np.ndarray:
    """
    X with A X - X B = C. The spectra of A and B must be disjoint; a
    separation below sep_rtol * (||A|| + ||B||) is rejected as ill-posed.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    _require_square(A, "A")
    _require_square(B, "B")
    if C.shape != (A.shape[0], B.shape[0]):
        raise MatrixError(f"C must be {A.shape[0]}x{B.shape[0]}, got {C.shape}")
    if C.size == 0:
        return np.zeros(C.shape)

    sep = min_separation(eigenvalues(A), eigenvalues(B))
    scale = spectral_norm(A) + spectral_norm(B)
    if sep <= sep_rtol * max(scale, 1.0):
        raise MatrixError(f"spectra of A and B overlap (separation {sep:.3e}); Sylvester equation is ill-posed")

    try:
        X = linalg.solve_sylvester(A, -B, C)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"Sylvester solve failed: {exc}") from exc
    return np.real_if_close(X).astype(float)


def min_separation(left: np.ndarray, right: np.ndarray) -> float:
    if left.size == 0 or right.size == 0:
        return float("inf")
    return float(np.min(np.abs(left[:, None] - right[None, :])))


def random_orthogonal(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix)."""
    rng = np.random.default_rng() if rng is None else rng
    if n == 0:
        return np.zeros((0, 0))
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))
