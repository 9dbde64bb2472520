"""
Minimum and maximum dissipation of a stable realization.

    delta_minus(H) = inf_w lambda_min(H(iw) + H(iw)^H)
    delta_plus(H)  = sup_w lambda_max(H(iw) + H(iw)^H)

delta_minus is found by bisection on [-2 ||H||_inf - margin, lambda_min(D + D^T)].
At a midpoint d the Hamiltonian N_d has purely imaginary eigenvalues iw
exactly when some eigenvalue of R(w) crosses the level d, which (below
lambda_min(D + D^T), the value at w = inf) means d > delta_minus. Every
crossing frequency found this way is also evaluated directly, together with
a bounded search between neighbouring crossings; the upper end of the
bracket only ever takes such attained values, and a level whose crossings
lambda_min does not confirm raises the lower end. The realization is
balanced first, so the axis test is relative to each eigenvalue.

||H||_inf itself is the negated minimum dissipation of the dilation
K(s) = [[0, H(s)], [0, 0]], whose dissipation matrix has eigenvalues
+-sigma_i(H(iw)); the same bisection serves both.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg, optimize

from matkit import axis_band, eigenvalues, spectral_norm
from settings import SETTINGS
from ss import FrequencyGrid, Realization, balance, freqresp, is_hurwitz, lambda_min_curve, negate

logger = logging.getLogger(__name__)

# Hard stop for a bisection that cannot shrink its bracket
_MAX_ITERATIONS = 200

PASSIVE = "passive"
ANTI_PASSIVE = "anti-passive"
PASSIFIABLE = "passifiable"
NON_PASSIVE = "non-passive"

_LABELS = {
    PASSIVE: "passive",
    ANTI_PASSIVE: "anti-passive",
    PASSIFIABLE: "non-passive, passifiable",
    NON_PASSIVE: "non-passive",
}


class DissipationError(RuntimeError):
    """Bisection could not proceed (level hits the spectrum of D + D^T, no progress)."""


class NotHurwitzError(ValueError):
    """The state matrix has eigenvalues in the closed right half-plane."""


@dataclass(frozen=True)
class DissipationBound:
    """Result of one bisection: value lies in [low, high], high is reached near omega."""

    value: float
    low: float
    high: float
    iterations: int
    omega: float
    retries: int = 0


@dataclass(frozen=True)
class DissipationReport:
    delta_minus: float
    delta_plus: float
    bracket_low: float
    bracket_high: float
    bisection_iterations: int
    tolerance: float
    classification: str
    hinf: float
    omega_minus: float
    omega_plus: float

    @property
    def label(self) -> str:
        return _LABELS[self.classification]

    @property
    def is_passive(self) -> bool:
        return self.classification == PASSIVE

    @property
    def is_passifiable(self) -> bool:
        return self.classification == PASSIFIABLE

    def as_dict(self) -> Dict[str, object]:
        out = asdict(self)
        out["label"] = self.label
        return out


@dataclass(frozen=True)
class SweepResult:
    """Dense-grid estimate of an extreme eigenvalue of R(w)."""

    value: float
    omega: float
    grid_value: float
    points: int


def require_hurwitz(R: Realization) -> None:
    if not is_hurwitz(R):
        worst = max(R.poles, key=lambda lam: lam.real)
        raise NotHurwitzError(f"state matrix is not Hurwitz (pole {worst:.6g})")


def _feedthrough_sum(R: Realization) -> np.ndarray:
    return R.D + R.D.T


def hamiltonian(R: Realization, delta: float) -> np.ndarray:
    """
    N_delta = blockdiag(A, -A^T) + [B; -C^T] (delta I - D - D^T)^-1 [C, B^T].
    Its eigenvalues are the zeros of Z(s) - delta I with Z(s) = H(s) + H(-s)^T.
    """
    S = _feedthrough_sum(R)
    gap = np.min(np.abs(linalg.eigvalsh(S) - delta))
    if gap <= 1e-14 * (1.0 + spectral_norm(S) + abs(delta)):
        raise DissipationError(f"level {delta:.12g} coincides with an eigenvalue of D + D^T")
    Q = delta * np.eye(R.p) - S
    left = np.vstack([R.B, -R.C.T])
    right = np.hstack([R.C, R.B.T])
    return linalg.block_diag(R.A, -R.A.T) + left @ linalg.solve(Q, right)


def imaginary_frequencies(N: np.ndarray, rtol: Optional[float] = None) -> np.ndarray:
    """Nonnegative w for every eigenvalue lam = iw of N with |Re lam| <= rtol (1 + |lam|)."""
    rtol = SETTINGS.imag_axis_rtol if rtol is None else rtol
    vals = eigenvalues(N)
    if vals.size == 0:
        return np.zeros(0)
    hits = vals[np.abs(vals.real) <= axis_band(vals, rtol)]
    return np.unique(np.abs(hits.imag))


def _sample_frequencies(omegas: np.ndarray) -> np.ndarray:
    """Crossing frequencies plus the midpoints between neighbouring ones."""
    w = np.sort(omegas)
    if w.size < 2:
        return w
    return np.concatenate([w, 0.5 * (w[1:] + w[:-1])])


def _lowest_between(R: Realization, crossings: np.ndarray, value: float,
                    where: float) -> Tuple[float, float]:
    """Bounded scalar search for the minimum of lambda_min between the crossings around `where`."""
    below = crossings[crossings < where]
    above = crossings[crossings > where]
    lo = float(below[-1]) if below.size else where
    hi = float(above[0]) if above.size else where
    if not hi > lo:
        return value, where

    def objective(w: float) -> float:
        return float(lambda_min_curve(R, [w])[0])

    res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * (1.0 + hi)})
    if res.fun < value:
        return float(res.fun), float(res.x)
    return value, where


def _bisect_min(R: Realization, low: float, high: float, tol: float,
                omega_high: float = math.inf) -> DissipationBound:
    """
    Shrink [low, high] around delta_minus(R). Requires high <= lambda_min(D + D^T)
    and low <= delta_minus(R); high only ever takes values of lambda_min
    evaluated at some frequency.
    """
    S_min = float(linalg.eigvalsh(_feedthrough_sum(R))[0])
    iterations = 0
    retries = 0

    while high - low > tol:
        if iterations >= _MAX_ITERATIONS:
            raise DissipationError(f"bisection stalled on [{low:.12g}, {high:.12g}]")
        mid = 0.5 * (low + high)
        N = None
        for attempt in range(SETTINGS.max_bracket_retries + 1):
            try:
                N = hamiltonian(R, mid)
                break
            except DissipationError:
                if attempt == SETTINGS.max_bracket_retries:
                    raise
                retries += 1
                mid -= tol
                logger.warning("bisection level hit the spectrum of D + D^T, shifting to %.12g", mid)
        iterations += 1

        best = math.inf
        omegas = imaginary_frequencies(N)
        if omegas.size:
            samples = _sample_frequencies(omegas)
            values = lambda_min_curve(R, samples)
            k = int(np.argmin(values))
            best, where = _lowest_between(R, np.sort(omegas), float(values[k]), float(samples[k]))
            if best < high:
                high, omega_high = best, where

        if best > mid:
            if omegas.size:
                logger.debug("no confirmed crossing among %d axis eigenvalue(s) at level %.6g",
                             omegas.size, mid)
            low = mid
        logger.debug("bisection %d: [%.12g, %.12g]", iterations, low, high)

    high = min(high, S_min)
    return DissipationBound(value=high, low=low, high=high, iterations=iterations,
                            omega=omega_high, retries=retries)


def default_tolerance(hinf: float) -> float:
    return SETTINGS.dissipation_rtol * (1.0 + hinf)


def min_dissipation_bound(R: Realization, tol: Optional[float] = None,
                          hinf: Optional[float] = None) -> DissipationBound:
    require_hurwitz(R)
    S_min = float(linalg.eigvalsh(_feedthrough_sum(R))[0])
    if R.n == 0:
        return DissipationBound(value=S_min, low=S_min, high=S_min, iterations=0, omega=math.inf)

    hinf = hinf_norm(R) if hinf is None else hinf
    tol = default_tolerance(hinf) if tol is None else tol
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")

    # Start with the best of w = 0 and w = inf
    high, omega = S_min, math.inf
    at_zero = float(lambda_min_curve(R, [0.0])[0])
    if at_zero < high:
        high, omega = at_zero, 0.0

    low = -2.0 * hinf - 10.0 * tol
    bound = _bisect_min(balance(R), low, high, tol, omega_high=omega)
    logger.debug("delta_minus = %.12g after %d step(s)", bound.value, bound.iterations)
    return bound


def min_dissipation(R: Realization, tol: Optional[float] = None) -> float:
    return min_dissipation_bound(R, tol).value


def max_dissipation(R: Realization, tol: Optional[float] = None) -> float:
    """delta_plus(H) = -delta_minus(-H)."""
    return -min_dissipation(negate(R), tol)


# Norm bounds

def gramians(R: Realization) -> Tuple[np.ndarray, np.ndarray]:
    """Controllability and observability Gramians of a Hurwitz realization."""
    require_hurwitz(R)
    P = linalg.solve_continuous_lyapunov(R.A, -R.B @ R.B.T)
    Q = linalg.solve_continuous_lyapunov(R.A.T, -R.C.T @ R.C)
    return 0.5 * (P + P.T), 0.5 * (Q + Q.T)


def hankel_singular_values(R: Realization) -> np.ndarray:
    """Descending Hankel singular values sqrt(eig(P Q))."""
    if R.n == 0:
        return np.zeros(0)
    P, Q = gramians(balance(R))
    vals = np.real(linalg.eigvals(P @ Q))
    return np.sort(np.sqrt(np.clip(vals, 0.0, None)))[::-1]


def hinf_upper_bound(R: Realization) -> float:
    """sigma_max(D) + 2 * (sum of Hankel singular values) >= ||H||_inf."""
    return spectral_norm(R.D) + 2.0 * float(np.sum(hankel_singular_values(R)))


def _gain_dilation(R: Realization) -> Realization:
    n, p = R.n, R.p
    zeros_p = np.zeros((p, p))
    return Realization(
        R.A,
        np.hstack([np.zeros((n, p)), R.B]),
        np.vstack([R.C, np.zeros((p, n))]),
        np.block([[zeros_p, R.D], [zeros_p, zeros_p]]),
    )


def _gain_samples(R: Realization) -> Tuple[float, float]:
    samples = np.concatenate([[0.0], np.abs(R.poles.imag), np.abs(R.poles)])
    gains = np.linalg.norm(freqresp(R, samples), ord=2, axis=(1, 2))
    k = int(np.argmax(gains))
    return float(gains[k]), float(samples[k])


def hinf_norm(R: Realization, rtol: Optional[float] = None) -> float:
    """max_w ||H(iw)||_2 to relative accuracy rtol."""
    require_hurwitz(R)
    rtol = SETTINGS.dissipation_rtol if rtol is None else rtol
    d_gain = spectral_norm(R.D)
    if R.n == 0:
        return d_gain

    R = balance(R)
    sampled, _ = _gain_samples(R)
    lower = max(d_gain, sampled)
    upper = max(hinf_upper_bound(R), lower)
    if upper <= 0.0:
        return 0.0
    if upper - lower <= rtol * upper:
        return lower

    tol = rtol * (lower if lower > 0.0 else upper)
    bound = _bisect_min(_gain_dilation(R), -upper * (1.0 + rtol), -lower, tol)
    return -bound.value


# Classification

def classify_values(delta_minus: float, delta_plus: float, tol: float) -> str:
    if delta_minus >= -tol:
        return PASSIVE
    if delta_plus <= tol:
        return ANTI_PASSIVE
    if delta_minus < 0.0 < delta_plus:
        return PASSIFIABLE
    return NON_PASSIVE


def classify(R: Realization, tol: Optional[float] = None) -> DissipationReport:
    require_hurwitz(R)
    hinf = hinf_norm(R)
    tol = default_tolerance(hinf) if tol is None else tol

    lower = min_dissipation_bound(R, tol, hinf=hinf)
    upper = min_dissipation_bound(negate(R), tol, hinf=hinf)
    delta_minus = lower.value
    delta_plus = -upper.value

    report = DissipationReport(
        delta_minus=delta_minus,
        delta_plus=delta_plus,
        bracket_low=lower.low,
        bracket_high=lower.high,
        bisection_iterations=lower.iterations + upper.iterations,
        tolerance=tol,
        classification=classify_values(delta_minus, delta_plus, tol),
        hinf=hinf,
        omega_minus=lower.omega,
        omega_plus=upper.omega,
    )
    logger.info("delta_minus=%.10g delta_plus=%.10g (%s)", delta_minus, delta_plus, report.label)
    return report


# Independent sweep oracle

def _refine(R: Realization, w: np.ndarray, values: np.ndarray, k: int) -> Tuple[float, float]:
    lo = w[max(k - 1, 0)]
    hi = w[min(k + 1, w.size - 1)]
    if not 0.0 < lo < hi:
        return float(values[k]), float(w[k])

    def objective(log_w: float) -> float:
        return float(lambda_min_curve(R, [10.0 ** log_w])[0])

    res = optimize.minimize_scalar(objective, bounds=(math.log10(lo), math.log10(hi)),
                                   method="bounded", options={"xatol": 1e-12})
    if res.fun < values[k]:
        return float(res.fun), float(10.0 ** res.x)
    return float(values[k]), float(w[k])


def sweep_min_eigenvalue(R: Realization, grid: Optional[FrequencyGrid] = None) -> SweepResult:
    """
    min over the grid, w = 0 and w = inf of lambda_min(R(w)), refined by a
    bounded scalar search around the grid minimizer. Needs no Hamiltonian.
    """
    if grid is None:
        grid = FrequencyGrid.log(SETTINGS.grid_wmin, SETTINGS.grid_wmax, SETTINGS.sweep_points)
    w = grid.omegas
    values = lambda_min_curve(R, w)
    k = int(np.argmin(values))
    grid_value = float(values[k])
    best, omega = _refine(R, w, values, k)

    at_zero = float(lambda_min_curve(R, [0.0])[0])
    at_inf = float(linalg.eigvalsh(_feedthrough_sum(R))[0])
    for value, where in ((at_zero, 0.0), (at_inf, math.inf)):
        if value < best:
            best, omega = value, where
    return SweepResult(value=best, omega=omega, grid_value=grid_value, points=len(grid))


def sweep_max_eigenvalue(R: Realization, grid: Optional[FrequencyGrid] = None) -> SweepResult:
    res = sweep_min_eigenvalue(negate(R), grid)
    return SweepResult(value=-res.value, omega=res.omega, grid_value=-res.grid_value, points=res.points)


def crossing_frequencies(R: Realization, level: float) -> List[float]:
    """Frequencies at which some eigenvalue of R(w) equals level."""
    if R.n == 0:
        return []
    return imaginary_frequencies(hamiltonian(balance(R), level)).tolist()
