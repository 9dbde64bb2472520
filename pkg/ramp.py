"""
Rational over-approximants of the ramp max(x, 0).

Two families are provided, both in partial-fraction form so they can be
applied to a transfer function term by term:

  * zeta_n(x) = x (1+x)^n / ((1+x)^n - 1), gap in [0, 1/n] on [-1, inf).
    For n = 2m the expansion has one real pole at -2 and m-1 complex
    pairs at -1 + exp(i pi k / m).
  * the minimax construction f(x) = (rho(x^2) + x + E_n) / 2 built on a
    best rational approximation rho(t) of sqrt(t) on [0, 1], moved to an
    arbitrary interval [-a, b] by the bilinear map x -> x / (tau x + kappa).

A complex term (xi, eta) always stands for Re{eta / (x - xi)}; its
conjugate partner is implicit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from settings import MINIMAX_TABLE_FILE, read_config_lines

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# |x| below this switches zeta_n to its two-term series around 0
_SERIES_SWITCH = 1e-9
# Slack when checking that a point lies in an approximant's interval
_INTERVAL_SLACK = 1e-12

ZETA = "zeta"
MINIMAX = "minimax"
SHIFT = "shift"


class RampError(ValueError):
    """Argument outside the domain of an approximant or a malformed table."""


@dataclass(frozen=True)
class MinimaxTable:
    """rho(t) = a[0] - sum_k a[k] / (t + b[k-1]) approximating sqrt(t) on [0, 1]."""

    n: int
    a: Tuple[float, ...]
    b: Tuple[float, ...]
    E_n: float

    def __post_init__(self) -> None:
        if len(self.a) != self.n + 1 or len(self.b) != self.n:
            raise RampError(f"table of order {self.n} needs {self.n + 1} a-values and {self.n} b-values")
        if any(v <= 0.0 for v in self.a[1:]) or any(v <= 0.0 for v in self.b):
            raise RampError("table coefficients a_k (k >= 1) and b_k must be positive")
        if list(self.b) != sorted(self.b) or len(set(self.b)) != len(self.b):
            raise RampError("table poles b_k must be distinct and ascending")
        if self.E_n <= 0.0:
            raise RampError(f"minimax error must be positive, got {self.E_n}")

    @classmethod
    def load(cls, path: Path) -> "MinimaxTable":
        rows: Dict[int, Tuple[float, float]] = {}
        for lineno, line in read_config_lines(path):
            parts = line.split()
            if len(parts) != 3:
                raise RampError(f"{path.name}:{lineno}: expected 'k a_k b_k', got {line!r}")
            try:
                k = int(parts[0])
                rows[k] = (float(parts[1]), float(parts[2]))
            except ValueError as exc:
                raise RampError(f"{path.name}:{lineno}: {exc}") from exc
        if 0 not in rows:
            raise RampError(f"{path}: missing row k = 0")
        n = max(rows)
        if sorted(rows) != list(range(n + 1)):
            raise RampError(f"{path}: rows must be numbered 0..{n} without gaps")
        a = tuple(rows[k][0] for k in range(n + 1))
        b = tuple(rows[k][1] for k in range(1, n + 1))
        return cls(n=n, a=a, b=b, E_n=rows[0][1])

    @property
    def degree(self) -> int:
        """Denominator degree of f(x) = (rho(x^2) + x + E_n) / 2."""
        return 2 * self.n


@lru_cache(maxsize=None)
def _load_table(path: str) -> MinimaxTable:
    table = MinimaxTable.load(Path(path))
    logger.debug("loaded minimax table n=%d from %s", table.n, path)
    return table


def default_table() -> MinimaxTable:
    return _load_table(str(MINIMAX_TABLE_FILE))


@dataclass(frozen=True)
class RampApproximant:
    """
    f(x) = slope x + offset + sum r / (x - p) + sum Re{eta / (x - xi)}
    with 0 <= f(x) - max(x, 0) <= alpha on interval.
    """

    linear_slope: float
    linear_offset: float
    complex_terms: Tuple[Tuple[complex, complex], ...] = ()
    real_terms: Tuple[Tuple[float, float], ...] = ()
    alpha: float = 0.0
    interval: Tuple[float, float] = (-1.0, math.inf)
    family: str = ZETA
    order: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "complex_terms",
                           tuple((complex(p), complex(r)) for p, r in self.complex_terms))
        object.__setattr__(self, "real_terms",
                           tuple((float(p), float(r)) for p, r in self.real_terms))
        low, high = self.interval
        if not low < high:
            raise RampError(f"empty interval [{low}, {high}]")
        for pole, _ in self.complex_terms:
            if pole.imag == 0.0:
                raise RampError(f"complex term with real pole {pole}")
        for pole, _ in self.real_terms:
            if low <= pole <= high:
                raise RampError(f"real pole {pole} lies inside [{low}, {high}]")

    @property
    def denominator_degree(self) -> int:
        return len(self.real_terms) + 2 * len(self.complex_terms)

    def evaluate(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.linear_slope * x + self.linear_offset
        for pole, residue in self.real_terms:
            out = out + residue / (x - pole)
        for pole, residue in self.complex_terms:
            out = out + np.real(residue / (x - pole))
        return out

    def __call__(self, x: ArrayLike) -> np.ndarray:
        return self.evaluate(x)

    def contains(self, x: ArrayLike) -> bool:
        x = np.asarray(x, dtype=float)
        low, high = self.interval
        slack = _INTERVAL_SLACK * (1.0 + max(abs(low), abs(high) if math.isfinite(high) else 0.0))
        return bool(np.all((x >= low - slack) & (x <= high + slack)))

    def scaled(self, nu: float) -> "RampApproximant":
        """nu f(x / nu): same gap shape on an interval nu times wider, gap bound nu alpha."""
        if nu <= 0.0:
            raise RampError(f"scale must be positive, got {nu}")
        low, high = self.interval
        return RampApproximant(
            linear_slope=self.linear_slope,
            linear_offset=nu * self.linear_offset,
            complex_terms=tuple((nu * p, nu * nu * r) for p, r in self.complex_terms),
            real_terms=tuple((nu * p, nu * nu * r) for p, r in self.real_terms),
            alpha=nu * self.alpha,
            interval=(nu * low, nu * high),
            family=self.family,
            order=self.order,
        )

    def as_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "order": self.order,
            "linear_slope": self.linear_slope,
            "linear_offset": self.linear_offset,
            "real_terms": [{"pole": p, "residue": r} for p, r in self.real_terms],
            "complex_terms": [
                {"pole": {"re": p.real, "im": p.imag}, "residue": {"re": r.real, "im": r.imag}}
                for p, r in self.complex_terms
            ],
            "alpha": self.alpha,
            "interval": list(self.interval),
            "denominator_degree": self.denominator_degree,
        }


# zeta family

def zeta(n: int, x: ArrayLike) -> np.ndarray:
    """zeta_n(x) = x (1+x)^n / ((1+x)^n - 1) on [-1, inf), 1/n at x = 0."""
    if n < 1:
        raise RampError(f"n must be >= 1, got {n}")
    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0):
        raise RampError("zeta_n is defined for x >= -1 only")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_growth = n * np.log1p(x)
        denom = np.expm1(log_growth)
        exact = x * np.exp(log_growth) / denom
    series = 1.0 / n + (n + 1) * x / (2.0 * n)
    out = np.where(np.abs(x) < _SERIES_SWITCH, series, exact)
    return out if out.ndim else float(out)


def phi(n: int, nu: float, x: ArrayLike) -> np.ndarray:
    """phi_n(x) = nu zeta_n(x / nu); phi_1(x) = x + nu."""
    if nu <= 0.0:
        raise RampError(f"nu must be positive, got {nu}")
    return nu * zeta(n, np.asarray(x, dtype=float) / nu)


def phi_double(prev: ArrayLike, x: ArrayLike) -> np.ndarray:
    """phi_2n(x) = phi_n(x)^2 / (2 phi_n(x) - x)."""
    prev = np.asarray(prev, dtype=float)
    x = np.asarray(x, dtype=float)
    denom = 2.0 * prev - x
    if np.any(np.abs(denom) <= 1e-300):
        raise RampError("doubling step divides by zero (2 phi_n(x) = x)")
    return prev * prev / denom


def zeta_partial_fractions(m: int) -> RampApproximant:
    """
    zeta_2m(x) = x + (1/m) / (x + 2)
                 + sum_{k=1}^{m-1} Re{(e^{2 pi i k/m} - e^{pi i k/m}) / m / (x + 1 - e^{pi i k/m})}.
    """
    if m < 1:
        raise RampError(f"m must be >= 1, got {m}")
    terms: List[Tuple[complex, complex]] = []
    for k in range(1, m):
        root = np.exp(1j * np.pi * k / m)
        terms.append((-1.0 + root, (root * root - root) / m))
    return RampApproximant(
        linear_slope=1.0,
        linear_offset=0.0,
        complex_terms=tuple(terms),
        real_terms=((-2.0, 1.0 / m),),
        alpha=1.0 / (2 * m),
        interval=(-1.0, math.inf),
        family=ZETA,
        order=2 * m,
    )


def shift_approximant(nu: float) -> RampApproximant:
    """f(x) = x + nu, the plain diagonal shift."""
    if nu <= 0.0:
        raise RampError(f"nu must be positive, got {nu}")
    return RampApproximant(linear_slope=1.0, linear_offset=nu, alpha=nu,
                           interval=(-nu, math.inf), family=SHIFT, order=0)


# minimax family

def minimax_rho(t: ArrayLike, table: Optional[MinimaxTable] = None) -> np.ndarray:
    table = default_table() if table is None else table
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise RampError("rho is evaluated on t >= 0 only")
    out = np.full(t.shape, table.a[0], dtype=float)
    for a_k, b_k in zip(table.a[1:], table.b):
        out = out - a_k / (t + b_k)
    return out if out.ndim else float(out)


def minimax_f(x: ArrayLike, table: Optional[MinimaxTable] = None) -> np.ndarray:
    """f(x) = (rho(x^2) + x + E_n) / 2 on [-1, 1]."""
    table = default_table() if table is None else table
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _INTERVAL_SLACK):
        raise RampError("minimax f is defined on [-1, 1] only")
    return 0.5 * (minimax_rho(x * x, table) + x + table.E_n)


def bilinear_params(a: float, b: float) -> Tuple[float, float]:
    """(tau, kappa) such that x -> x / (tau x + kappa) maps [-a, b] onto [-1, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise RampError(f"interval ends must be positive, got a={a}, b={b}")
    return (b - a) / (b + a), 2.0 * a * b / (a + b)


def minimax_transformed(a: float, b: float, table: Optional[MinimaxTable] = None) -> RampApproximant:
    """
    f_ab(x) = (tau x + kappa) f(x / (tau x + kappa)) expanded into
    k1 x + k2 + sum_k Re{-a_k eta_k / 2 / (x - xi_k)}, gap in [0, E_n max(a, b)] on [-a, b].
    """
    table = default_table() if table is None else table
    tau, kappa = bilinear_params(a, b)
    lead = table.E_n + table.a[0]

    k1 = 1.0 + lead * tau
    k2 = lead * kappa
    terms: List[Tuple[complex, complex]] = []
    for a_k, b_k in zip(table.a[1:], table.b):
        c = 1.0 + tau * tau * b_k
        k1 -= a_k * tau ** 3 / c
        k2 -= a_k * kappa * tau * tau * (3.0 + tau * tau * b_k) / (c * c)
        root = math.sqrt(b_k)
        xi = kappa * root / (1j - tau * root)
        eta = xi ** 3 / (kappa * b_k * b_k)
        terms.append((xi, -0.5 * a_k * eta))

    return RampApproximant(
        linear_slope=0.5 * k1,
        linear_offset=0.5 * k2,
        complex_terms=tuple(terms),
        alpha=table.E_n * max(a, b),
        interval=(-a, b),
        family=MINIMAX,
        order=table.degree,
    )


def minimax_composed(x: ArrayLike, a: float, b: float, table: Optional[MinimaxTable] = None) -> np.ndarray:
    """(tau x + kappa) f(x / (tau x + kappa)), evaluated directly."""
    tau, kappa = bilinear_params(a, b)
    x = np.asarray(x, dtype=float)
    w = tau * x + kappa
    return w * minimax_f(np.clip(x / w, -1.0, 1.0), table)


def gap(f: RampApproximant, x: ArrayLike) -> np.ndarray:
    """f(x) - max(x, 0), for x inside the approximant's interval."""
    if not f.contains(x):
        raise RampError(f"point(s) outside the interval {f.interval}")
    x = np.asarray(x, dtype=float)
    out = f.evaluate(x) - np.maximum(x, 0.0)
    return out if np.ndim(out) else float(out)
