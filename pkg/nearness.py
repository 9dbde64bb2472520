"""
Nearest positive-semidefinite matrix.

For Hermitian M = U diag(lam) U^H the eigen-clamp U diag(max(lam, 0)) U^H is
the nearest PSD matrix in both the Frobenius and the spectral norm, at
distances sqrt(sum of lam_i^2 over lam_i < 0) and max(0, -lam_min).
Applied pointwise to R(w) = H(iw) + H(iw)^H it gives the reference R+(w)
that passivated models are measured against.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ss import Realization, dissipation_matrices, evaluate

logger = logging.getLogger(__name__)

# Relative size of a symmetric defect that is silently removed
HERMITIAN_RTOL = 1e-8
# Eigenvalues this close to zero (relative to ||M||_2) are clamped to zero
ZERO_RTOL = 1e-12


class NearnessError(ValueError):
    """Input is not square or not Hermitian."""


@dataclass(frozen=True, eq=False)
class PsdProjection:
    input: np.ndarray
    projected: np.ndarray
    frobenius_distance: float
    spectral_distance: float
    asymmetry: float = 0.0


def _hermitian_part(M: np.ndarray) -> np.ndarray:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NearnessError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NearnessError("matrix contains non-finite entries")
    scale = np.linalg.norm(M, 2) if M.size else 0.0
    defect = np.linalg.norm(M - M.conj().T, 2) if M.size else 0.0
    if defect > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise NearnessError(f"matrix is not Hermitian (||M - M^H||_2 = {defect:.3e}, ||M||_2 = {scale:.3e})")
    return 0.5 * (M + M.conj().T), float(defect)


def nearest_psd(M) -> PsdProjection:
    M = np.asarray(M)
    if not np.iscomplexobj(M):
        M = M.astype(float)
    H, defect = _hermitian_part(M)
    if defect:
        logger.debug("symmetrized input with defect %.3e", defect)

    lam, U = np.linalg.eigh(H)
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    lam = np.where(np.abs(lam) <= ZERO_RTOL * scale, 0.0, lam)
    negative = lam[lam < 0.0]
    clamped = np.maximum(lam, 0.0)
    P = (U * clamped) @ U.conj().T
    P = 0.5 * (P + P.conj().T)

    return PsdProjection(
        input=np.array(M),
        projected=P,
        frobenius_distance=float(np.sqrt(np.sum(negative ** 2))),
        spectral_distance=float(max(0.0, -lam[0])) if lam.size else 0.0,
        asymmetry=defect,
    )


def nearest_psd_batch(stack: np.ndarray) -> np.ndarray:
    """Eigen-clamp of every matrix in a (k, p, p) stack of Hermitian matrices."""
    stack = np.asarray(stack)
    herm = 0.5 * (stack + np.conj(np.swapaxes(stack, 1, 2)))
    lam, U = np.linalg.eigh(herm)
    clamped = np.maximum(lam, 0.0)
    return (U * clamped[:, None, :]) @ np.conj(np.swapaxes(U, 1, 2))


def r_plus(H: Realization, omega: float) -> PsdProjection:
    """Nearest PSD matrix to R(w) = H(iw) + H(iw)^H."""
    Hw = evaluate(H, 1j * float(omega))
    return nearest_psd(Hw + Hw.conj().T)


def r_plus_curve(H: Realization, omegas) -> np.ndarray:
    """R+(w) on a set of frequencies, shape (len(omegas), p, p)."""
    return nearest_psd_batch(dissipation_matrices(H, omegas))
