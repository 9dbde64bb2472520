"""
Global passivation of a stable, non-passive realization H(s).

All methods work on Z(s) = H(s) + H(-s)^T, whose values on the imaginary
axis are the Hermitian matrices R(w) = H(iw) + H(iw)^H. A scalar rational
f with 0 <= f(x) - max(x, 0) <= alpha on the spectrum of every R(w) is
applied to Z as a matrix function; the result V = f(Z) is per-symmetric,
its stable half G satisfies G(iw) + G(iw)^H = f(R(w)) >= 0, and
||f(R(w)) - R+(w)||_2 <= alpha for every w.

Methods:

    shift      G = H + (nu/2) I                       alpha = nu
    iterate    Z_k = Z_{k-1} (2 Z_{k-1} - Z)^-1 Z_{k-1}  alpha = nu / 2^k
    partfrac   f = nu zeta_2m(x / nu), term by term    alpha = nu / (2m)
    minimax    f = bilinear-transformed minimax ramp  alpha = E_n max(a, b)

with nu = |delta_minus(H)| (plus a small slack) and [-a, b] the
dissipation interval of H.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from dissipation import DissipationReport, classify, gramians, hinf_norm, min_dissipation
from nearness import r_plus_curve
from project import ProjectionError, stable_half_persym
from ramp import (
    MinimaxTable,
    RampApproximant,
    default_table,
    minimax_transformed,
    zeta_partial_fractions,
)
from settings import SETTINGS
from ss import (
    FrequencyGrid,
    Realization,
    SingularSystemError,
    add,
    add_all,
    add_const,
    balance,
    dissipation_matrices,
    freqresp,
    inverse,
    is_hurwitz,
    multiply,
    negate,
    para_hermitian,
    real_part_shifted_inverse,
    scale,
)

logger = logging.getLogger(__name__)

METHODS = ("shift", "iterate", "partfrac", "minimax")


class PassivationError(RuntimeError):
    """Assembly, inversion or split failed during passivation."""


class NotPassifiableError(ValueError):
    """The input is passive, anti-passive or otherwise not passifiable."""


@dataclass(frozen=True, eq=False)
class PassivationResult:
    G: Realization
    method: str
    nu: float
    alpha: float
    states: int
    delta_minus: float
    delta_plus: float
    interval: Tuple[float, float]
    assembled_states: int
    pole_estimate: int
    hinf: float
    achieved_delta_minus: Optional[float] = None
    sweep_error: Optional[float] = None
    relative_error_stats: Optional[Dict[str, float]] = None
    reduced_states: Optional[int] = None
    violations: Tuple[str, ...] = ()
    approximant: Optional[RampApproximant] = None
    check_omegas: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def certified(self) -> bool:
        return self.achieved_delta_minus is not None and not self.violations

    def summary(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "nu": self.nu,
            "alpha": self.alpha,
            "states": self.states,
            "assembled_states": self.assembled_states,
            "pole_estimate": self.pole_estimate,
            "hinf": self.hinf,
            "reduced_states": self.reduced_states,
            "delta_minus": self.delta_minus,
            "delta_plus": self.delta_plus,
            "interval": list(self.interval),
            "achieved_delta_minus": self.achieved_delta_minus,
            "sweep_error": self.sweep_error,
            "relative_error_stats": self.relative_error_stats,
            "violations": list(self.violations),
            "approximant": self.approximant.as_dict() if self.approximant else None,
        }


def pole_estimate(states: int, degree: int) -> int:
    """N (M + 1) poles of f(Z) projected, before any cancellation."""
    if states < 0 or degree < 0:
        raise ValueError(f"need states and degree >= 0, got {states}, {degree}")
    return states * (degree + 1)


def certificate_floor(hinf: float) -> float:
    """Lowest delta_minus(G) still accepted as passive for an input of gain hinf."""
    return -1e-7 * (1.0 + hinf)


def _shift_amount(report: DissipationReport) -> float:
    """|delta_minus| taken from the lower bracket end, plus slack."""
    base = max(abs(report.delta_minus), abs(report.bracket_low))
    return base + SETTINGS.nu_slack * (1.0 + abs(report.delta_minus))


def _passifiable_report(H: Realization, report: Optional[DissipationReport]) -> DissipationReport:
    report = classify(H) if report is None else report
    if not report.is_passifiable:
        raise NotPassifiableError(f"model is {report.label} (delta_minus={report.delta_minus:.6g}, "
                                  f"delta_plus={report.delta_plus:.6g}); nothing to passify")
    return report


def _skew(H: Realization) -> np.ndarray:
    return 0.5 * (H.D - H.D.T)


def compose(f: RampApproximant, Z: Realization) -> Realization:
    """
    f(Z(s)) = slope Z + offset I + sum r (Z - pI)^-1 + sum Re{eta (Z - xi I)^-1}.
    """
    parts: List[Realization] = []
    if f.linear_slope != 0.0:
        parts.append(scale(Z, f.linear_slope))
    try:
        for pole, residue in f.real_terms:
            parts.append(scale(inverse(add_const(Z, -pole)), residue))
        for pole, residue in f.complex_terms:
            parts.append(real_part_shifted_inverse(Z, pole, residue))
    except SingularSystemError as exc:
        raise PassivationError(f"approximant pole meets the spectrum of Z(inf): {exc}") from exc

    offset = f.linear_offset * np.eye(Z.p)
    if not parts:
        return Realization.static(offset)
    return add_const(add_all(parts), offset)


def _stable_half(V: Realization, H: Realization) -> Realization:
    try:
        return stable_half_persym(V, skew=_skew(H))
    except ProjectionError as exc:
        raise PassivationError(f"projection onto the stable half failed: {exc}") from exc


def _result(H: Realization, G: Realization, report: DissipationReport, *, method: str,
            nu: float, alpha: float, assembled: int, degree: int,
            approximant: Optional[RampApproximant], interval: Tuple[float, float]) -> PassivationResult:
    logger.info("%s: nu=%.6g alpha=%.6g, %d assembled state(s), %d after projection",
                method, nu, alpha, assembled, G.n)
    omegas = tuple(w for w in (report.omega_minus, report.omega_plus) if np.isfinite(w))
    return PassivationResult(
        G=G,
        method=method,
        nu=nu,
        alpha=alpha,
        states=G.n,
        delta_minus=report.delta_minus,
        delta_plus=report.delta_plus,
        interval=interval,
        assembled_states=assembled,
        pole_estimate=pole_estimate(H.n, degree),
        hinf=report.hinf,
        approximant=approximant,
        check_omegas=omegas,
    )


def shift_passify(H: Realization, report: Optional[DissipationReport] = None,
                  check: bool = True) -> PassivationResult:
    """G = H + (nu/2) I."""
    report = _passifiable_report(H, report)
    nu = _shift_amount(report)
    G = add_const(H, 0.5 * nu)
    result = _result(H, G, report, method="shift", nu=nu, alpha=nu, assembled=H.n, degree=0,
                     approximant=None, interval=(-nu, report.delta_plus))
    return verify(H, result) if check else result


def passify_iterative(H: Realization, k: int, report: Optional[DissipationReport] = None,
                      check: bool = True) -> PassivationResult:
    """k doubling steps starting from Z_0 = Z + nu I; k = 0 is the plain shift."""
    if k < 0:
        raise ValueError(f"number of steps must be >= 0, got {k}")
    report = _passifiable_report(H, report)
    if k == 0:
        return shift_passify(H, report, check)

    nu = _shift_amount(report)
    Z = para_hermitian(balance(H)).Z
    Zk = add_const(Z, nu)
    for step in range(1, k + 1):
        try:
            denom = inverse(add(scale(Zk, 2.0), negate(Z)))
        except SingularSystemError as exc:
            raise PassivationError(f"step {step}: 2 Z_k - Z has no well-conditioned inverse: {exc}") from exc
        Zk = multiply(multiply(Zk, denom), Zk)
        logger.debug("iterate step %d: %d states", step, Zk.n)

    G = _stable_half(Zk, H)
    alpha = nu / 2 ** k
    result = _result(H, G, report, method=f"iterate({k})", nu=nu, alpha=alpha, assembled=Zk.n,
                     degree=2 ** k - 1, approximant=None, interval=(-nu, report.delta_plus))
    return verify(H, result) if check else result


def passify_partfrac(H: Realization, m: int, report: Optional[DissipationReport] = None,
                     check: bool = True) -> PassivationResult:
    """f = nu zeta_2m(x / nu) applied to Z term by term."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    report = _passifiable_report(H, report)
    nu = _shift_amount(report)
    f = zeta_partial_fractions(m).scaled(nu)
    V = compose(f, para_hermitian(balance(H)).Z)
    G = _stable_half(V, H)
    result = _result(H, G, report, method=f"partfrac({m})", nu=nu, alpha=f.alpha, assembled=V.n,
                     degree=f.denominator_degree, approximant=f, interval=(-nu, report.delta_plus))
    return verify(H, result) if check else result


def passify_minimax(H: Realization, table: Optional[MinimaxTable] = None,
                    report: Optional[DissipationReport] = None, check: bool = True) -> PassivationResult:
    """Minimax ramp moved to [-a, b] = [-nu, delta_plus] applied to Z."""
    table = default_table() if table is None else table
    report = _passifiable_report(H, report)
    a = _shift_amount(report)
    b = report.delta_plus + report.tolerance + SETTINGS.nu_slack * (1.0 + report.delta_plus)
    f = minimax_transformed(a, b, table)
    V = compose(f, para_hermitian(balance(H)).Z)
    G = _stable_half(V, H)
    result = _result(H, G, report, method=f"minimax({table.n})", nu=a, alpha=f.alpha, assembled=V.n,
                     degree=f.denominator_degree, approximant=f, interval=(-a, b))
    return verify(H, result) if check else result


def run_method(H: Realization, method: str, *, steps: int = 2, m: int = 5,
               table: Optional[MinimaxTable] = None,
               report: Optional[DissipationReport] = None) -> PassivationResult:
    if method == "shift":
        return shift_passify(H, report)
    if method == "iterate":
        return passify_iterative(H, steps, report)
    if method == "partfrac":
        return passify_partfrac(H, m, report)
    if method == "minimax":
        return passify_minimax(H, table, report)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


# Verification

def _verification_grid(result: PassivationResult, grid: Optional[FrequencyGrid]) -> FrequencyGrid:
    grid = FrequencyGrid.default() if grid is None else grid
    return grid.including(result.check_omegas)


def verify(H: Realization, result: PassivationResult,
           grid: Optional[FrequencyGrid] = None) -> PassivationResult:
    """
    Recompute delta_minus(G), the sweep error max_w ||G(iw) + G(iw)^H - R+(w)||_2
    and the relative deviation from H. Violations are recorded, never raised.
    """
    G = result.G
    w = _verification_grid(result, grid).omegas
    violations: List[str] = []
    alpha = result.alpha

    achieved: Optional[float] = None
    if is_hurwitz(G):
        achieved = min_dissipation(G)
        if achieved < certificate_floor(result.hinf):
            violations.append(f"delta_minus(G) = {achieved:.3e} is negative")
    else:
        violations.append("G is not Hurwitz stable")

    sweep_error: Optional[float] = None
    stats: Optional[Dict[str, float]] = None
    try:
        defect = dissipation_matrices(G, w) - r_plus_curve(H, w)
        sweep_error = float(np.max(np.abs(np.linalg.eigvalsh(defect))))
        HG = freqresp(G, w)
        HH = freqresp(H, w)
        rel = (np.linalg.norm(HG - HH, ord=2, axis=(1, 2))
               / np.maximum(np.linalg.norm(HH, ord=2, axis=(1, 2)), np.finfo(float).tiny))
        stats = {"max": float(np.max(rel)), "mean": float(np.mean(rel))}
    except SingularSystemError as exc:
        violations.append(f"sweep failed: {exc}")

    if sweep_error is not None and sweep_error > alpha + 1e-6 * (1.0 + alpha):
        violations.append(f"sweep error {sweep_error:.6e} exceeds alpha = {alpha:.6e}")

    for message in violations:
        logger.warning("%s: %s", result.method, message)
    return replace(result, achieved_delta_minus=achieved, sweep_error=sweep_error,
                   relative_error_stats=stats, violations=tuple(violations))


# Reduction

def _psd_factor(M: np.ndarray) -> np.ndarray:
    """L with M = L L^T, negative round-off eigenvalues dropped."""
    vals, vecs = linalg.eigh(0.5 * (M + M.T))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def balanced_truncation(G: Realization, tol: Optional[float] = None) -> Tuple[Realization, np.ndarray]:
    """Square-root balanced truncation keeping Hankel singular values > tol * largest."""
    tol = SETTINGS.reduce_tol if tol is None else tol
    if G.n == 0:
        return G, np.zeros(0)
    try:
        P, Q = gramians(G)
    except (linalg.LinAlgError, ValueError) as exc:
        raise PassivationError(f"Gramian computation failed: {exc}") from exc

    Lp = _psd_factor(P)
    Lq = _psd_factor(Q)
    U, hsv, Vt = linalg.svd(Lq.T @ Lp)
    if hsv.size == 0 or hsv[0] == 0.0:
        return Realization.static(G.D), hsv
    r = int(np.sum(hsv > tol * hsv[0]))
    scale_r = 1.0 / np.sqrt(hsv[:r])
    T = Lp @ Vt[:r].T * scale_r
    Ti = (scale_r[:, None] * U[:, :r].T) @ Lq.T
    return Realization(Ti @ G.A @ T, Ti @ G.B, G.C @ T, G.D), hsv


def reduce(G: Realization, tol: Optional[float] = None) -> Realization:
    """
    Balanced truncation of a Hurwitz G. If G was passive and the truncated
    model is not, G is returned unchanged.
    """
    if not is_hurwitz(G):
        raise PassivationError("reduction needs a Hurwitz stable model")
    Gr, hsv = balanced_truncation(G, tol)
    if Gr.n == G.n:
        return G

    floor = certificate_floor(hinf_norm(G))
    was_passive = min_dissipation(G) >= floor
    if was_passive and (not is_hurwitz(Gr) or min_dissipation(Gr) < floor):
        logger.warning("reduction to %d states loses passivity; keeping %d states", Gr.n, G.n)
        return G

    logger.info("reduced %d -> %d states (discarded Hankel sum %.3e)", G.n, Gr.n, float(np.sum(hsv[Gr.n:])))
    return Gr


def reduce_result(H: Realization, result: PassivationResult, tol: Optional[float] = None,
                  grid: Optional[FrequencyGrid] = None) -> PassivationResult:
    Gr = reduce(result.G, tol)
    updated = replace(result, G=Gr, reduced_states=Gr.n)
    return verify(H, updated, grid)
