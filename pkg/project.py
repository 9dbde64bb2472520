"""
Stable/anti-stable additive split of a transfer function.

The state matrix is brought to ordered real Schur form with the
left-half-plane eigenvalues leading,

    Q^T A Q = [[T11, T12], [0, T22]],

and the coupling T12 is removed by the similarity [[I, X], [0, I]] with
T11 X - X T22 = -T12. The two diagonal blocks then carry the stable and
the anti-stable part. Each part gets half the feedthrough.

For a per-symmetric V(s) = V(-s)^T the anti-stable part is the mirror of
the stable one, so V(s) = X(s) + X(-s)^T with X = stable part + E for any
skew-symmetric E.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from matkit import ConvergenceError, MatrixError, axis_band, random_orthogonal, real_schur, solve_sylvester
from settings import SETTINGS
from ss import (
    FrequencyGrid,
    ParaHermitianRealization,
    Realization,
    add,
    add_const,
    balance,
    freqresp,
    with_feedthrough,
)

logger = logging.getLogger(__name__)

# Seed of the orthogonal similarity used when the first split attempt fails
RETRY_SEED = 20240229
# Points of the reconstruction check
_CHECK_POINTS = 50


class ProjectionError(RuntimeError):
    """Imaginary-axis eigenvalue or an ill-posed decoupling."""


@dataclass(frozen=True, eq=False)
class SplitResult:
    stable: Realization
    anti: Realization
    d_split: np.ndarray
    residual: float
    axis_tolerance: float
    retried: bool = False


def _axis_band(poles: np.ndarray, tol: Optional[float]) -> np.ndarray:
    if tol is not None:
        return np.full(poles.shape, float(tol))
    return axis_band(poles, SETTINGS.split_rtol)


def _mirror_threshold(poles: np.ndarray) -> float:
    return SETTINGS.split_rtol * (1.0 + float(np.max(np.abs(poles), initial=0.0)))


def mirror_defect(poles: np.ndarray) -> float:
    """
    Largest distance between a pole and its matched mirror image -conj(pole),
    after an optimal one-to-one matching.
    """
    if poles.size == 0:
        return 0.0
    cost = np.abs(poles[:, None] + np.conj(poles)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def _check_grid(V: Realization) -> FrequencyGrid:
    mags = np.abs(V.poles[np.abs(V.poles) > 0.0])
    if mags.size == 0:
        return FrequencyGrid.log(1e-3, 1e3, _CHECK_POINTS)
    return FrequencyGrid.log(0.1 * mags.min(), 10.0 * mags.max() + 1e-12, _CHECK_POINTS)


def reconstruction_error(V: Realization, stable: Realization, anti: Realization) -> float:
    """max_w ||V(iw) - stable(iw) - anti(iw)||_2 / max(1, ||V(iw)||_2) on a pole-scaled grid."""
    w = _check_grid(V).omegas
    target = freqresp(V, w)
    parts = freqresp(add(stable, anti), w)
    num = np.linalg.norm(target - parts, ord=2, axis=(1, 2))
    den = np.maximum(1.0, np.linalg.norm(target, ord=2, axis=(1, 2)))
    return float(np.max(num / den))


def _split_once(A: np.ndarray, B: np.ndarray, C: np.ndarray, D: np.ndarray):
    schur = real_schur(A, lambda lam: lam.real < 0.0)
    k = schur.selected
    T, Q = schur.T, schur.Q
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    X = solve_sylvester(T11, T22, -T12)

    QB = Q.T @ B
    CQ = C @ Q
    B1 = QB[:k] - X @ QB[k:]
    B2 = QB[k:]
    C1 = CQ[:, :k]
    C2 = CQ[:, :k] @ X + CQ[:, k:]
    half = 0.5 * D
    return Realization(T11, B1, C1, half), Realization(T22, B2, C2, half)


def stable_antistable_split(V: Realization, tol: Optional[float] = None) -> SplitResult:
    """
    V(s) = stable(s) + anti(s); each part carries D / 2. A pole counts as
    on the axis when |Re| <= tol, or by default split_rtol (1 + |pole|).
    """
    half = 0.5 * V.D
    if V.n == 0:
        empty = Realization.static(half)
        return SplitResult(stable=empty, anti=Realization.static(half), d_split=half,
                           residual=0.0, axis_tolerance=0.0 if tol is None else float(tol))

    Vb = balance(V)
    poles = Vb.poles
    band = _axis_band(poles, tol)
    on_axis = np.flatnonzero(np.abs(poles.real) <= band)
    if on_axis.size:
        k = on_axis[0]
        raise ProjectionError(
            f"pole {poles[k]:.6g} lies within {band[k]:.3e} of the imaginary axis; no stable/anti-stable split"
        )

    defect = mirror_defect(poles)
    if defect > _mirror_threshold(poles):
        logger.warning("pole set is not symmetric about the imaginary axis (defect %.3e)", defect)

    retried = False
    try:
        stable, anti = _split_once(Vb.A, Vb.B, Vb.C, Vb.D)
    except (ConvergenceError, MatrixError) as exc:
        logger.warning("split failed (%s); retrying after a random orthogonal similarity", exc)
        retried = True
        W = random_orthogonal(Vb.n, np.random.default_rng(RETRY_SEED))
        try:
            stable, anti = _split_once(W.T @ Vb.A @ W, W.T @ Vb.B, Vb.C @ W, Vb.D)
        except (ConvergenceError, MatrixError) as exc2:
            raise ProjectionError(f"stable/anti-stable split failed twice: {exc2}") from exc2

    if stable.n:
        sp = stable.poles
        bad = np.flatnonzero(sp.real >= -_axis_band(sp, tol))
        if bad.size:
            raise ProjectionError(f"stable block has pole {sp[bad[0]]:.6g}")
    if anti.n:
        ap = anti.poles
        bad = np.flatnonzero(ap.real <= _axis_band(ap, tol))
        if bad.size:
            raise ProjectionError(f"anti-stable block has pole {ap[bad[0]]:.6g}")

    residual = reconstruction_error(V, stable, anti)
    logger.debug("split %d states into %d stable + %d anti-stable (residual %.2e)",
                 V.n, stable.n, anti.n, residual)
    return SplitResult(stable=stable, anti=anti, d_split=half, residual=residual,
                       axis_tolerance=float(band.max()), retried=retried)


def stable_half_persym(V: Union[ParaHermitianRealization, Realization],
                       skew: Optional[np.ndarray] = None,
                       tol: Optional[float] = None) -> Realization:
    """
    X(s) with X(s) + X(-s)^T = V(s): the stable part of V plus the symmetric
    half of V(inf) plus the skew-symmetric E.
    """
    Z = V.Z if isinstance(V, ParaHermitianRealization) else V
    E = np.zeros((Z.p, Z.p)) if skew is None else np.asarray(skew, dtype=float)
    if E.shape != (Z.p, Z.p):
        raise ValueError(f"skew part must be {Z.p}x{Z.p}, got {E.shape}")
    if np.linalg.norm(E + E.T) > 1e-12 * (1.0 + np.linalg.norm(E)):
        raise ValueError("supplied matrix is not skew-symmetric")

    split = stable_antistable_split(Z, tol)
    sym_half = 0.5 * (split.d_split + split.d_split.T)
    return add_const(with_feedthrough(split.stable, sym_half), E)
