"""
Frequency-sweep tables.

sweep_table gives one row per frequency:

    omega, re_11, im_11, re_12, im_12, ..., re_pp, im_pp, lambda_min

(entries row-major, 1-based), with lambda_min the smallest eigenvalue of
H(iw) + H(iw)^H. relative_error_table gives omega, relerr with
relerr = ||G(iw) - H(iw)||_2 / ||H(iw)||_2.

export_table writes CSV with a fixed float format, so identical input
gives identical bytes, or a spreadsheet when the target ends in .xlsx.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ss import FrequencyGrid, Realization, RealizationError, freqresp_skipping

FLOAT_FORMAT = "%.15g"


def sweep_columns(p: int) -> List[str]:
    columns = ["omega"]
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            columns += [f"re_{i}{j}", f"im_{i}{j}"]
    columns.append("lambda_min")
    return columns


def sweep_table(R: Realization, grid: FrequencyGrid) -> Tuple[pd.DataFrame, np.ndarray]:
    """(table, skipped frequencies); frequencies on poles of R are dropped."""
    omegas, values, skipped = freqresp_skipping(R, grid.omegas)
    p = R.p
    data = np.empty((omegas.size, 2 + 2 * p * p))
    data[:, 0] = omegas
    flat = values.reshape(omegas.size, p * p)
    data[:, 1:-1:2] = flat.real
    data[:, 2:-1:2] = flat.imag
    if omegas.size:
        herm = values + np.conj(np.swapaxes(values, 1, 2))
        data[:, -1] = np.linalg.eigvalsh(herm)[:, 0]
    return pd.DataFrame(data, columns=sweep_columns(p)), skipped


def relative_error_table(G: Realization, H: Realization, grid: FrequencyGrid) -> pd.DataFrame:
    if G.p != H.p:
        raise RealizationError(f"port mismatch: {G.p} vs {H.p}")
    w_g, HG, _ = freqresp_skipping(G, grid.omegas)
    w_h, HH, _ = freqresp_skipping(H, grid.omegas)
    common, ig, ih = np.intersect1d(w_g, w_h, return_indices=True)
    num = np.linalg.norm(HG[ig] - HH[ih], ord=2, axis=(1, 2))
    den = np.linalg.norm(HH[ih], ord=2, axis=(1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(num == 0.0, 0.0, num / den)
    return pd.DataFrame({"omega": common, "relerr": rel})


def export_table(frame: pd.DataFrame, target: Union[str, Path, IO[str]],
                 comments: Iterable[str] = ()) -> Optional[str]:
    """
    Writes `frame` to a path or an open text stream. Comment lines are
    written first, each prefixed with '# '. Returns the path when a file
    was written.
    """
    comments = list(comments)
    if isinstance(target, (str, Path)):
        path = Path(target)
        path.parent.mkdir(exist_ok=True, parents=True)
        if path.suffix.lower() == ".xlsx":
            frame.to_excel(path, index=False, engine="openpyxl")
            return str(path)
        with path.open("w", encoding="utf-8", newline="") as fh:
            _write_csv(frame, fh, comments)
        return str(path)

    _write_csv(frame, target, comments)
    return None


def _write_csv(frame: pd.DataFrame, fh: IO[str], comments: List[str]) -> None:
    for line in comments:
        fh.write(f"# {line}\n")
    frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
