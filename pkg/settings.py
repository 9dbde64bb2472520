"""
Numeric defaults and file locations.

Values are read once from config/defaults.txt ("key = value" lines,
'#' comments). Keys missing from the file keep the built-in default
below. PASSIFY_GRID_POINTS in the environment overrides grid_points.

Other modules do:

    from settings import SETTINGS
    tol = SETTINGS.split_rtol * (1.0 + norm)
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union


BASE_DIR = Path(__file__).resolve().parent
CONFIG_DIR = BASE_DIR / "config"
MODELS_DIR = BASE_DIR / "models"
OUTPUT_DIR = BASE_DIR / "output"

DEFAULTS_FILE = CONFIG_DIR / "defaults.txt"
MINIMAX_TABLE_FILE = CONFIG_DIR / "minimax_n4.txt"

GRID_POINTS_ENV = "PASSIFY_GRID_POINTS"


class SettingsError(ValueError):
    """Malformed configuration file or environment override."""


@dataclass(frozen=True)
class Settings:
    grid_points: int = 2000
    grid_wmin: float = 1e-4
    grid_wmax: float = 1e6
    sweep_points: int = 100_000
    dissipation_rtol: float = 1e-8
    imag_axis_rtol: float = 1e-8
    max_bracket_retries: int = 3
    split_rtol: float = 1e-7
    inverse_max_cond: float = 1e12
    nu_slack: float = 1e-10
    reduce_tol: float = 1e-9


def read_config_lines(path: Path) -> List[Tuple[int, str]]:
    """
    Non-empty, non-comment lines of a config file with their line numbers.
    A missing file yields no lines.
    """
    if not path.exists():
        return []
    out: List[Tuple[int, str]] = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            out.append((lineno, line))
    return out


def _coerce(name: str, raw: str, where: str) -> Union[int, float]:
    kinds: Dict[str, type] = {f.name: f.type for f in fields(Settings)}
    kind = kinds[name]
    try:
        if kind in (int, "int"):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        return float(raw)
    except ValueError as exc:
        raise SettingsError(f"{where}: value {raw!r} for {name!r} is not a number") from exc


def load_settings(path: Optional[Path] = None) -> Settings:
    path = DEFAULTS_FILE if path is None else Path(path)
    known = {f.name for f in fields(Settings)}
    values: Dict[str, Union[int, float]] = {}

    for lineno, line in read_config_lines(path):
        where = f"{path.name}:{lineno}"
        if "=" not in line:
            raise SettingsError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise SettingsError(f"{where}: unknown setting {key!r}")
        values[key] = _coerce(key, raw, where)

    env_points = os.environ.get(GRID_POINTS_ENV)
    if env_points:
        values["grid_points"] = _coerce("grid_points", env_points.strip(), GRID_POINTS_ENV)

    settings = replace(Settings(), **values)
    if settings.grid_points < 2:
        raise SettingsError(f"grid_points must be at least 2, got {settings.grid_points}")
    if not 0.0 < settings.grid_wmin < settings.grid_wmax:
        raise SettingsError(
            f"need 0 < grid_wmin < grid_wmax, got {settings.grid_wmin}, {settings.grid_wmax}"
        )
    return settings


# Load once
SETTINGS = load_settings()
