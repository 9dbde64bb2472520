"""
State-space realization algebra.

A Realization is the real quadruple (A, B, C, D) of a square p-port
system H(s) = C (sI - A)^-1 B + D. Everything that builds new systems
(sums, products, inverses, the para-Hermitian doubling
Z(s) = H(s) + H(-s)^T and the realified shifted inverse used when
composing ramp approximants) lives here, together with frequency
response evaluation on a FrequencyGrid.

State dimensions are never reduced by these operations: a sum has the
states of both terms, a product the states of both factors, an inverse
the states of the system it inverts. Pole counts reported downstream
depend on that.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, signal

from matkit import as_real_matrix, axis_band, eigenvalues
from settings import SETTINGS

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]

# Frequency points handled per batched solve
_CHUNK = 512


class RealizationError(ValueError):
    """Inconsistent dimensions or an improper transfer function."""


class SingularSystemError(ArithmeticError):
    """sI - A or a feedthrough matrix that must be inverted is singular."""


@dataclass(frozen=True, eq=False)
class Realization:
    """
    Real state-space quadruple. Arrays are copied on construction and
    made read-only, so instances can be shared freely.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        D = as_real_matrix(self.D, "D")
        p = D.shape[0]
        if D.shape != (p, p) or p < 1:
            raise RealizationError(f"D must be square with p >= 1, got shape {D.shape}")

        A = np.array(self.A, dtype=float, copy=True)
        if A.size == 0:
            A = np.zeros((0, 0))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise RealizationError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        B = np.atleast_2d(np.array(self.B, dtype=float, copy=True)) if n else np.zeros((0, p))
        C = np.atleast_2d(np.array(self.C, dtype=float, copy=True)) if n else np.zeros((p, 0))

        if B.shape != (n, p):
            raise RealizationError(f"B must be {n}x{p}, got {B.shape}")
        if C.shape != (p, n):
            raise RealizationError(f"C must be {p}x{n}, got {C.shape}")
        for name, arr in (("A", A), ("B", B), ("C", C)):
            if not np.all(np.isfinite(arr)):
                raise RealizationError(f"{name} contains non-finite entries")

        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @cached_property
    def poles(self) -> np.ndarray:
        return eigenvalues(self.A)

    def __call__(self, s: Number) -> np.ndarray:
        return evaluate(self, s)

    def __repr__(self) -> str:
        return f"Realization(n={self.n}, p={self.p})"

    @classmethod
    def static(cls, D) -> "Realization":
        """Pure feedthrough system without states."""
        D = as_real_matrix(D, "D")
        p = D.shape[0]
        return cls(np.zeros((0, 0)), np.zeros((0, p)), np.zeros((p, 0)), D)


@dataclass(frozen=True, eq=False)
class ParaHermitianRealization:
    """
    Z(s) = H(s) + H(-s)^T with the feedthrough of H kept, so the skew part
    of H(inf), which Z loses, can be put back later.
    """

    Z: Realization
    source_d: np.ndarray

    @property
    def skew(self) -> np.ndarray:
        return 0.5 * (self.source_d - self.source_d.T)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Ascending angular frequencies (rad/s) with the spacing they came from."""

    omegas: np.ndarray
    spacing: str = "log"

    def __post_init__(self) -> None:
        w = np.unique(np.asarray(self.omegas, dtype=float).ravel())
        if w.size == 0:
            raise RealizationError("frequency grid is empty")
        if not np.all(np.isfinite(w)):
            raise RealizationError("frequency grid contains non-finite values")
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)

    @classmethod
    def log(cls, wmin: float, wmax: float, points: int) -> "FrequencyGrid":
        if not 0.0 < wmin < wmax:
            raise RealizationError(f"need 0 < wmin < wmax, got {wmin}, {wmax}")
        if points < 2:
            raise RealizationError(f"need at least 2 points, got {points}")
        return cls(np.geomspace(wmin, wmax, points), "log")

    @classmethod
    def linear(cls, wmin: float, wmax: float, points: int) -> "FrequencyGrid":
        if not wmin < wmax:
            raise RealizationError(f"need wmin < wmax, got {wmin}, {wmax}")
        if points < 2:
            raise RealizationError(f"need at least 2 points, got {points}")
        return cls(np.linspace(wmin, wmax, points), "linear")

    @classmethod
    def default(cls) -> "FrequencyGrid":
        return cls.log(SETTINGS.grid_wmin, SETTINGS.grid_wmax, SETTINGS.grid_points)

    def including(self, extra: Iterable[float]) -> "FrequencyGrid":
        extra = [w for w in extra if w is not None and np.isfinite(w)]
        if not extra:
            return self
        return FrequencyGrid(np.concatenate([self.omegas, np.abs(extra)]), self.spacing)

    @property
    def wmin(self) -> float:
        return float(self.omegas[0])

    @property
    def wmax(self) -> float:
        return float(self.omegas[-1])

    def __len__(self) -> int:
        return int(self.omegas.size)

    def __iter__(self) -> Iterator[float]:
        return iter(self.omegas.tolist())


# Evaluation

def _singular_mask(R: Realization, s: np.ndarray) -> np.ndarray:
    if R.n == 0:
        return np.zeros(s.shape, dtype=bool)
    dist = np.abs(s[:, None] - R.poles[None, :])
    return np.any(dist <= axis_band(R.poles, 1e-12)[None, :], axis=1)


def evaluate(R: Realization, s: Number) -> np.ndarray:
    """H(s) = D + C (sI - A)^-1 B as a complex p x p matrix."""
    s = complex(s)
    if R.n == 0:
        return R.D.astype(complex)
    if _singular_mask(R, np.array([s]))[0]:
        raise SingularSystemError(f"s = {s:.6g} is a pole of the realization")
    M = s * np.eye(R.n) - R.A
    try:
        X = linalg.solve(M, R.B.astype(complex))
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f"sI - A is singular at s = {s:.6g}") from exc
    return R.D + R.C @ X


def _batched(R: Realization, s: np.ndarray) -> np.ndarray:
    out = np.empty((s.size, R.p, R.p), dtype=complex)
    if R.n == 0:
        out[:] = R.D
        return out
    eye = np.eye(R.n)
    for start in range(0, s.size, _CHUNK):
        chunk = s[start:start + _CHUNK]
        M = chunk[:, None, None] * eye - R.A
        Bk = np.broadcast_to(R.B.astype(complex), (chunk.size, R.n, R.p))
        X = np.linalg.solve(M, Bk)
        out[start:start + chunk.size] = R.D + R.C @ X
    return out


def freqresp(R: Realization, omegas) -> np.ndarray:
    """H(i w) for every w, shape (len(omegas), p, p)."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    s = 1j * w
    bad = _singular_mask(R, s)
    if np.any(bad):
        raise SingularSystemError(f"i*w is a pole for w = {w[bad][0]:.6g}")
    try:
        return _batched(R, s)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"frequency response failed: {exc}") from exc


def freqresp_skipping(R: Realization, omegas) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Like freqresp, but frequencies that hit a pole are dropped.
    Returns (kept omegas, values, skipped omegas).
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    bad = _singular_mask(R, 1j * w)
    if np.any(bad):
        logger.warning("skipping %d frequency sample(s) on poles of the model", int(bad.sum()))
    kept = w[~bad]
    return kept, _batched(R, 1j * kept), w[bad]


def dissipation_matrices(R: Realization, omegas) -> np.ndarray:
    """R(w) = H(iw) + H(iw)^H on a set of frequencies."""
    H = freqresp(R, omegas)
    return H + np.conj(np.swapaxes(H, 1, 2))


def lambda_min_curve(R: Realization, omegas) -> np.ndarray:
    """Smallest eigenvalue of H(iw) + H(iw)^H per frequency."""
    return np.linalg.eigvalsh(dissipation_matrices(R, omegas))[:, 0]


# Construction

def _trim_leading_zeros(coeffs: Sequence[float]) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if arr.ndim != 1:
        raise RealizationError("polynomial coefficients must be a flat list")
    if not np.all(np.isfinite(arr)):
        raise RealizationError("polynomial coefficients must be finite")
    return np.trim_zeros(arr, "f")


def from_tf(num: Sequence[float], den: Sequence[float]) -> Realization:
    """
    Controllable companion realization of num(s)/den(s), coefficients in
    descending powers of s.
    """
    den_arr = np.atleast_1d(np.asarray(den, dtype=float))
    if den_arr.size == 0 or den_arr[0] == 0.0:
        raise RealizationError("denominator leading coefficient must be nonzero")
    if not np.all(np.isfinite(den_arr)):
        raise RealizationError("denominator coefficients must be finite")
    num_arr = _trim_leading_zeros(num)
    if num_arr.size == 0:
        return Realization.static([[0.0]])
    if num_arr.size > den_arr.size:
        raise RealizationError(
            f"improper transfer function: numerator degree {num_arr.size - 1} "
            f"exceeds denominator degree {den_arr.size - 1}"
        )
    if den_arr.size == 1:
        return Realization.static([[num_arr[0] / den_arr[0]]])

    A, B, C, D = signal.tf2ss(num_arr, den_arr)
    return Realization(A, B, C, np.atleast_2d(D))


def _entry_pair(entry, where: str) -> Tuple[Sequence[float], Sequence[float]]:
    if isinstance(entry, Mapping):
        try:
            return entry["num"], entry["den"]
        except KeyError as exc:
            raise RealizationError(f"{where}: missing key {exc.args[0]!r}") from exc
    try:
        num, den = entry
    except (TypeError, ValueError) as exc:
        raise RealizationError(f"{where}: expected a (num, den) pair") from exc
    return num, den


def from_rational_matrix(entries: Sequence[Sequence[object]]) -> Realization:
    """
    p x p transfer matrix given entry-wise as (num, den) pairs or
    {"num": ..., "den": ...} mappings. Each entry is realized on its own
    and the results are stacked block-diagonally; no poles are shared
    between entries.
    """
    rows = list(entries)
    p = len(rows)
    if p == 0 or any(len(row) != p for row in rows):
        raise RealizationError("transfer matrix must be square and non-empty")

    blocks: List[Tuple[int, int, Realization]] = []
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            num, den = _entry_pair(entry, f"entry ({i},{j})")
            try:
                blocks.append((i, j, from_tf(num, den)))
            except RealizationError as exc:
                raise RealizationError(f"entry ({i},{j}): {exc}") from exc

    n = sum(r.n for _, _, r in blocks)
    A = np.zeros((n, n))
    B = np.zeros((n, p))
    C = np.zeros((p, n))
    D = np.zeros((p, p))
    k = 0
    for i, j, r in blocks:
        A[k:k + r.n, k:k + r.n] = r.A
        B[k:k + r.n, j] = r.B[:, 0]
        C[i, k:k + r.n] = r.C[0, :]
        D[i, j] = r.D[0, 0]
        k += r.n
    return Realization(A, B, C, D)


# Interconnection

def _check_ports(R1: Realization, R2: Realization) -> None:
    if R1.p != R2.p:
        raise RealizationError(f"port mismatch: {R1.p} vs {R2.p}")


def add(R1: Realization, R2: Realization) -> Realization:
    """Parallel connection, R1(s) + R2(s)."""
    _check_ports(R1, R2)
    return Realization(
        linalg.block_diag(R1.A, R2.A),
        np.vstack([R1.B, R2.B]),
        np.hstack([R1.C, R2.C]),
        R1.D + R2.D,
    )


def add_all(systems: Sequence[Realization]) -> Realization:
    """Parallel connection of many systems in one block-diagonal assembly."""
    if not systems:
        raise RealizationError("nothing to add")
    p = systems[0].p
    for r in systems[1:]:
        if r.p != p:
            raise RealizationError(f"port mismatch: {p} vs {r.p}")
    return Realization(
        linalg.block_diag(*[r.A for r in systems]) if any(r.n for r in systems) else np.zeros((0, 0)),
        np.vstack([r.B for r in systems]),
        np.hstack([r.C for r in systems]),
        sum(r.D for r in systems),
    )


def scale(R: Realization, c: float) -> Realization:
    return Realization(R.A, R.B, float(c) * R.C, float(c) * R.D)


def negate(R: Realization) -> Realization:
    return scale(R, -1.0)


def add_const(R: Realization, K) -> Realization:
    """R(s) + K with K a scalar (times identity) or a p x p matrix."""
    K = np.asarray(K, dtype=float)
    if K.ndim == 0:
        K = float(K) * np.eye(R.p)
    if K.shape != (R.p, R.p):
        raise RealizationError(f"constant must be {R.p}x{R.p}, got {K.shape}")
    return Realization(R.A, R.B, R.C, R.D + K)


def with_feedthrough(R: Realization, D) -> Realization:
    return Realization(R.A, R.B, R.C, D)


def balance(R: Realization) -> Realization:
    """
    Diagonal state scaling T^-1 A T, T^-1 B, C T that equilibrates the
    system matrix [[A, B], [C, 0]]. Companion forms of polynomials with
    widely spread coefficients come out with entries of comparable size.
    The transfer function is unchanged; scale factors are powers of 2.
    """
    if R.n == 0:
        return R
    n, p = R.n, R.p
    system = np.block([[R.A, R.B], [R.C, np.zeros((p, p))]])
    _, (factors, _) = linalg.matrix_balance(system, permute=False, separate=True)
    t = np.asarray(factors[:n], dtype=float)

    B = R.B / t[:, None]
    C = R.C * t[None, :]
    nb, nc = np.linalg.norm(B), np.linalg.norm(C)
    if nb > 0.0 and nc > 0.0:
        # Same weight on the input and the output side
        t = t * 2.0 ** np.round(0.5 * np.log2(nb / nc))
        B = R.B / t[:, None]
        C = R.C * t[None, :]
    return Realization(R.A * t[None, :] / t[:, None], B, C, R.D)


def transpose(R: Realization) -> Realization:
    """Realization of H(s)^T."""
    return Realization(R.A.T, R.C.T, R.B.T, R.D.T)


def multiply(R1: Realization, R2: Realization) -> Realization:
    """Series connection R1(s) R2(s): u -> R2 -> R1 -> y."""
    _check_ports(R1, R2)
    n1, n2 = R1.n, R2.n
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = R1.A
    A[:n1, n1:] = R1.B @ R2.C
    A[n1:, n1:] = R2.A
    B = np.vstack([R1.B @ R2.D, R2.B])
    C = np.hstack([R1.C, R1.D @ R2.C])
    return Realization(A, B, C, R1.D @ R2.D)


def _feedthrough_inverse(D: np.ndarray, max_cond: float) -> np.ndarray:
    cond = np.linalg.cond(D)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularSystemError(f"feedthrough matrix is singular or ill-conditioned (cond = {cond:.3e})")
    return np.linalg.inv(D)


def inverse(R: Realization, max_cond: Optional[float] = None) -> Realization:
    """
    Realization of R(s)^-1 with the same number of states. Needs an
    invertible, well-conditioned D.
    """
    max_cond = SETTINGS.inverse_max_cond if max_cond is None else max_cond
    Dinv = _feedthrough_inverse(R.D, max_cond)
    return Realization(R.A - R.B @ Dinv @ R.C, R.B @ Dinv, -Dinv @ R.C, Dinv)


def para_hermitian(H: Realization) -> ParaHermitianRealization:
    """
    Z(s) = H(s) + H(-s)^T with 2n states; Z(iw) = H(iw) + H(iw)^H.
    H(-s)^T is realized as (-A^T, C^T, -B^T, D^T).
    """
    Z = Realization(
        linalg.block_diag(H.A, -H.A.T),
        np.vstack([H.B, H.C.T]),
        np.hstack([H.C, -H.B.T]),
        H.D + H.D.T,
    )
    return ParaHermitianRealization(Z=Z, source_d=np.array(H.D))


def real_part_shifted_inverse(H: Realization, xi: Number, eta: Number,
                              max_cond: Optional[float] = None) -> Realization:
    """
    Real realization of Re{eta (H(s) - xi I)^-1}: the complex inverse
    system is built from D_xi = D - xi I and split into real and imaginary
    state components, keeping the real part of the output. 2n states.
    """
    max_cond = SETTINGS.inverse_max_cond if max_cond is None else max_cond
    xi = complex(xi)
    eta = complex(eta)
    D_xi = H.D.astype(complex) - xi * np.eye(H.p)
    cond = np.linalg.cond(D_xi)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularSystemError(f"D - xi I is singular for xi = {xi:.6g} (cond = {cond:.3e})")
    Dinv = np.linalg.inv(D_xi)

    At = H.A - H.B @ Dinv @ H.C
    Bt = eta * (H.B @ Dinv)
    Ct = -Dinv @ H.C
    Dt = eta * Dinv

    A = np.block([[At.real, -At.imag], [At.imag, At.real]])
    B = np.vstack([Bt.real, Bt.imag])
    C = np.hstack([Ct.real, -Ct.imag])
    return Realization(A, B, C, Dt.real)


def is_hurwitz(R: Realization, tol: Optional[float] = None) -> bool:
    """True iff every pole has real part below -tol (default: a band relative to |pole|)."""
    if R.n == 0:
        return True
    band = axis_band(R.poles) if tol is None else tol
    return bool(np.all(R.poles.real < -band))


def max_relative_gap(R1: Realization, R2: Realization, omegas) -> float:
    """max_w ||R1(iw) - R2(iw)||_2 / max(1, ||R2(iw)||_2)."""
    H1 = freqresp(R1, omegas)
    H2 = freqresp(R2, omegas)
    num = np.linalg.norm(H1 - H2, ord=2, axis=(1, 2))
    den = np.maximum(1.0, np.linalg.norm(H2, ord=2, axis=(1, 2)))
    return float(np.max(num / den))
