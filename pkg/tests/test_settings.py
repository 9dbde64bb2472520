from __future__ import annotations

import pytest

from settings import DEFAULTS_FILE, GRID_POINTS_ENV, Settings, SettingsError, load_settings, read_config_lines


def test_bundled_defaults_match_builtin_values(monkeypatch):
    monkeypatch.delenv(GRID_POINTS_ENV, raising=False)
    assert load_settings(DEFAULTS_FILE) == Settings()


def test_missing_file_gives_builtin_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(GRID_POINTS_ENV, raising=False)
    assert load_settings(tmp_path / "absent.txt") == Settings()


def test_comments_and_blank_lines_are_skipped(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# header\n\n  grid_points = 50\n# trailing\n", encoding="utf-8")
    assert read_config_lines(path) == [(3, "grid_points = 50")]


def test_values_are_coerced_to_field_types(tmp_path, monkeypatch):
    monkeypatch.delenv(GRID_POINTS_ENV, raising=False)
    path = tmp_path / "cfg.txt"
    path.write_text("grid_points = 1e3\nsplit_rtol = 1e-6\n", encoding="utf-8")
    settings = load_settings(path)
    assert settings.grid_points == 1000
    assert isinstance(settings.grid_points, int)
    assert settings.split_rtol == pytest.approx(1e-6)
    assert settings.reduce_tol == Settings().reduce_tol


def test_environment_overrides_grid_points(tmp_path, monkeypatch):
    monkeypatch.setenv(GRID_POINTS_ENV, "123")
    assert load_settings(tmp_path / "absent.txt").grid_points == 123


@pytest.mark.parametrize("content, fragment", [
    ("grid_points 50\n", "key = value"),
    ("no_such_key = 1\n", "unknown setting"),
    ("grid_wmin = fast\n", "not a number"),
    ("grid_points = 1\n", "at least 2"),
    ("grid_wmin = 10\ngrid_wmax = 1\n", "grid_wmin < grid_wmax"),
])
def test_malformed_files_raise_with_location(tmp_path, monkeypatch, content, fragment):
    monkeypatch.delenv(GRID_POINTS_ENV, raising=False)
    path = tmp_path / "cfg.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(SettingsError, match=fragment):
        load_settings(path)
