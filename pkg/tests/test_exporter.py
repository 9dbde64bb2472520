from __future__ import annotations

import io

import numpy as np
import pandas as pd
import pytest

from exporter import export_table, relative_error_table, sweep_columns, sweep_table
from ss import FrequencyGrid, add_const, from_tf


def test_siso_columns_and_values(toy):
    frame, skipped = sweep_table(toy, FrequencyGrid.linear(0.0, 2.0, 3))
    assert list(frame.columns) == ["omega", "re_11", "im_11", "lambda_min"]
    assert skipped.size == 0
    w = np.array([0.0, 1.0, 2.0])
    H = (1 - 1j * w) / (1 + 1j * w)
    np.testing.assert_allclose(frame["re_11"], H.real, atol=1e-14)
    np.testing.assert_allclose(frame["im_11"], H.imag, atol=1e-14)
    np.testing.assert_allclose(frame["lambda_min"], 2 * H.real, atol=1e-14)


def test_two_port_columns(trafe1):
    frame, _ = sweep_table(trafe1, FrequencyGrid.log(1e-2, 1e3, 40))
    assert frame.shape == (40, 10)
    assert list(frame.columns) == sweep_columns(2)
    assert sweep_columns(2)[1:5] == ["re_11", "im_11", "re_12", "im_12"]
    assert frame["lambda_min"].min() < 0


def test_frequencies_on_poles_are_skipped():
    integrator = from_tf([1], [1, 0])
    frame, skipped = sweep_table(integrator, FrequencyGrid.linear(0.0, 1.0, 2))
    assert list(frame["omega"]) == [1.0]
    assert list(skipped) == [0.0]


def test_relative_error_table(toy):
    grid = FrequencyGrid.log(1e-2, 1e2, 25)
    same = relative_error_table(toy, toy, grid)
    assert list(same.columns) == ["omega", "relerr"]
    assert same["relerr"].max() == 0.0

    shifted = relative_error_table(add_const(toy, 0.5), toy, grid)
    np.testing.assert_allclose(shifted["relerr"], 0.5, rtol=1e-12)


def test_csv_output_is_byte_stable(toy, tmp_path):
    frame, _ = sweep_table(toy, FrequencyGrid.log(1e-1, 1e1, 7))
    first = io.StringIO()
    second = io.StringIO()
    assert export_table(frame, first, ["made by test"]) is None
    export_table(frame, second, ["made by test"])
    assert first.getvalue() == second.getvalue()

    lines = first.getvalue().splitlines()
    assert lines[0] == "# made by test"
    assert lines[1] == "omega,re_11,im_11,lambda_min"
    assert len(lines) == 2 + 7

    path = tmp_path / "sub" / "toy.csv"
    assert export_table(frame, path, ["made by test"]) == str(path)
    assert path.read_text(encoding="utf-8") == first.getvalue()
    back = pd.read_csv(path, comment="#")
    np.testing.assert_allclose(back.to_numpy(), frame.to_numpy(), rtol=1e-14)


def test_spreadsheet_output(toy, tmp_path):
    pytest.importorskip("openpyxl")
    frame, _ = sweep_table(toy, FrequencyGrid.log(1e-1, 1e1, 5))
    path = tmp_path / "toy.xlsx"
    assert export_table(frame, path) == str(path)
    back = pd.read_excel(path, engine="openpyxl")
    assert list(back.columns) == list(frame.columns)
    np.testing.assert_allclose(back.to_numpy(), frame.to_numpy(), rtol=1e-12)
