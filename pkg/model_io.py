"""
Reading and writing model files and run reports (JSON).

A model file holds one system in one of three kinds:

    {"kind": "ss",  "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}
    {"kind": "tf",  "num": [...], "den": [...]}
    {"kind": "tfm", "entries": [[{"num": [...], "den": [...]}, ...], ...]}

plus the optional keys "name" and "source". Coefficients are in
descending powers of s.

Reports are the summaries of passivation or dissipation runs. Output
files go under output/ by default:

    output/<model slug>_<suffix>
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from settings import OUTPUT_DIR
from ss import Realization, RealizationError, from_rational_matrix, from_tf

KINDS = ("ss", "tf", "tfm")


class ModelFileError(ValueError):
    """Unreadable or malformed model file; names the file and, where known, line or field."""

    def __init__(self, path: Union[str, Path], message: str, *,
                 line: Optional[int] = None, field: Optional[str] = None) -> None:
        self.path = Path(path)
        self.line = line
        self.field = field
        where = self.path.name
        if line is not None:
            where += f":{line}"
        if field is not None:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True, eq=False)
class LoadedModel:
    realization: Realization
    name: str
    kind: str
    source: Optional[str] = None


def slugify(name: str) -> str:
    """File-name-safe version of a model name."""
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", name.strip())
    return slug.strip("_") or "model"


def make_output_path(model_path: Union[str, Path], suffix: str,
                     output_dir: Optional[Path] = None) -> Path:
    """
    Builds output/<slug>_<suffix> for a model file.
    """
    output_dir = OUTPUT_DIR if output_dir is None else Path(output_dir)
    return output_dir / f"{slugify(Path(model_path).stem)}_{suffix}"


# Reading

def _number(value: Any, path: Path, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError(path, f"expected a number, got {value!r}", field=where)
    if not math.isfinite(value):
        raise ModelFileError(path, "value is not finite", field=where)
    return float(value)


def _vector(value: Any, path: Path, where: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise ModelFileError(path, "expected a non-empty list of numbers", field=where)
    return [_number(v, path, f"{where}[{i}]") for i, v in enumerate(value)]


def _matrix(value: Any, path: Path, where: str) -> np.ndarray:
    if not isinstance(value, list):
        raise ModelFileError(path, "expected a list of rows", field=where)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ModelFileError(path, "expected a list of numbers", field=f"{where}[{i}]")
        rows.append([_number(v, path, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ModelFileError(path, f"rows have different lengths {sorted(widths)}", field=where)
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=float).reshape(len(rows), widths.pop())


def _require(data: Mapping[str, Any], key: str, path: Path) -> Any:
    if key not in data:
        raise ModelFileError(path, "missing required field", field=key)
    return data[key]


def _parse_ss(data: Mapping[str, Any], path: Path) -> Realization:
    D = _matrix(_require(data, "D", path), path, "D")
    p = D.shape[0]
    A = _matrix(_require(data, "A", path), path, "A")
    n = A.shape[0]
    B = _matrix(_require(data, "B", path), path, "B")
    C = _matrix(_require(data, "C", path), path, "C")
    if n == 0:
        B = np.zeros((0, p))
        C = np.zeros((p, 0))
    return Realization(A, B, C, D)


def _parse_tfm(data: Mapping[str, Any], path: Path) -> Realization:
    entries = _require(data, "entries", path)
    if not isinstance(entries, list) or not entries:
        raise ModelFileError(path, "expected a non-empty square grid", field="entries")
    grid = []
    for i, row in enumerate(entries):
        if not isinstance(row, list):
            raise ModelFileError(path, "expected a list of entries", field=f"entries[{i}]")
        cells = []
        for j, cell in enumerate(row):
            where = f"entries[{i}][{j}]"
            if not isinstance(cell, Mapping):
                raise ModelFileError(path, "expected an object with num and den", field=where)
            num = _vector(_require(cell, "num", path), path, f"{where}.num")
            den = _vector(_require(cell, "den", path), path, f"{where}.den")
            cells.append((num, den))
        grid.append(cells)
    return from_rational_matrix(grid)


def parse_model(data: Any, path: Union[str, Path] = "<memory>") -> LoadedModel:
    path = Path(path)
    if not isinstance(data, Mapping):
        raise ModelFileError(path, "top level must be a JSON object")
    kind = _require(data, "kind", path)
    if kind not in KINDS:
        raise ModelFileError(path, f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", field="kind")

    try:
        if kind == "ss":
            realization = _parse_ss(data, path)
        elif kind == "tf":
            num = _vector(_require(data, "num", path), path, "num")
            den = _vector(_require(data, "den", path), path, "den")
            realization = from_tf(num, den)
        else:
            realization = _parse_tfm(data, path)
    except RealizationError as exc:
        raise ModelFileError(path, str(exc)) from exc

    name = data.get("name") or path.stem
    source = data.get("source")
    return LoadedModel(realization=realization, name=str(name), kind=kind,
                       source=str(source) if source is not None else None)


def read_model(path: Union[str, Path]) -> LoadedModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path!s}")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(path, f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from exc
    return parse_model(data, path)


# Writing

def to_jsonable(obj: Any) -> Any:
    """
    Plain JSON types for dataclasses, numpy values and complex numbers.
    Complex values become {"re": ..., "im": ...}; non-finite floats become strings.
    """
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(obj.real)), "im": to_jsonable(float(obj.imag))}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def model_document(realization: Realization, name: Optional[str] = None,
                   source: Optional[str] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"kind": "ss"}
    if name:
        doc["name"] = name
    if source:
        doc["source"] = source
    doc["A"] = realization.A.tolist()
    doc["B"] = realization.B.tolist()
    doc["C"] = realization.C.tolist()
    doc["D"] = realization.D.tolist()
    return doc


def _write_json(path: Path, data: Any) -> str:
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, ensure_ascii=False, allow_nan=False)
        fh.write("\n")
    return str(path)


def write_model(path: Union[str, Path], realization: Realization, name: Optional[str] = None,
                source: Optional[str] = None) -> str:
    """Writes kind "ss"; floats keep full precision so reading back is exact."""
    return _write_json(Path(path), model_document(realization, name, source))


def write_report(path: Union[str, Path], record: Union[Mapping[str, Any], Any]) -> str:
    """
    Writes a run report as pretty JSON.
    If `record` is a dataclass, it is converted field by field.
    """
    if not (is_dataclass(record) or isinstance(record, Mapping)):
        raise TypeError(f"Unsupported record type for report writing: {type(record)!r}")
    return _write_json(Path(path), to_jsonable(record))


def read_report(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report file not found: {path!s}")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def list_models(directory: Union[str, Path]) -> Sequence[Path]:
    return sorted(Path(directory).glob("*.json"))
