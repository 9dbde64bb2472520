from __future__ import annotations

import io
import json

import pandas as pd
import pytest

from cli import EXIT_ERROR, EXIT_NOT_PASSIVE, EXIT_OK, main
from model_io import read_model, read_report
from settings import MODELS_DIR

TOY = str(MODELS_DIR / "toy.json")
TTP = str(MODELS_DIR / "ttp.json")
LOWPASS = str(MODELS_DIR / "lowpass.json")
TRAFE1 = str(MODELS_DIR / "trafe1.json")
DUMI1 = str(MODELS_DIR / "dumi1.json")


def test_check_non_passive_model(capsys):
    assert main(["check", TTP]) == EXIT_NOT_PASSIVE
    out = capsys.readouterr().out
    assert "[check] classification : non-passive, passifiable" in out


def test_check_passive_model(capsys):
    assert main(["check", LOWPASS]) == EXIT_OK
    assert "classification : passive" in capsys.readouterr().out


def test_unreadable_model_exits_with_error(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{ not json", encoding="utf-8")
    assert main(["check", str(broken)]) == EXIT_ERROR
    assert "broken.json:1" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_unstable_model_exits_with_error(tmp_path, capsys):
    path = tmp_path / "unstable.json"
    path.write_text(json.dumps({"kind": "tf", "num": [1], "den": [1, -1]}), encoding="utf-8")
    assert main(["check", str(path)]) == EXIT_ERROR
    assert "NotHurwitzError" in capsys.readouterr().err


def test_models_lists_the_bundled_files(capsys):
    assert main(["models"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "trafe1       tfm  n=6   p=2" in out
    assert "ttp          tf   n=5   p=1" in out
    assert out.count("[models]") == len(list(MODELS_DIR.glob("*.json")))


def test_models_reports_unreadable_files(tmp_path, capsys):
    (tmp_path / "ok.json").write_text(json.dumps({"kind": "tf", "name": "ok", "num": [1], "den": [1, 1]}),
                                      encoding="utf-8")
    (tmp_path / "broken.json").write_text("{ not json", encoding="utf-8")
    assert main(["models", "--dir", str(tmp_path)]) == EXIT_ERROR
    assert "ok " in capsys.readouterr().out
    assert main(["models", "--dir", str(tmp_path / "empty")]) == EXIT_ERROR


def test_dissipation_report_as_json(capsys):
    assert main(["dissipation", TOY, "--sweep"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["model"] == "toy"
    assert data["report"]["delta_minus"] == pytest.approx(-2.0, abs=1e-8)
    assert data["report"]["label"] == "non-passive, passifiable"
    assert data["sweep"]["delta_plus"] == pytest.approx(2.0, abs=1e-8)


def test_freqresp_to_stdout(capsys):
    assert main(["freqresp", TOY, "--wmin", "0.1", "--wmax", "10", "--points", "3"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out), comment="#")
    assert list(frame.columns) == ["omega", "re_11", "im_11", "lambda_min"]
    assert len(frame) == 3


def test_freqresp_trafe1_to_file(tmp_path, capsys):
    out = tmp_path / "trafe1.csv"
    code = main(["freqresp", TRAFE1, "--wmin", "1e-2", "--wmax", "1e3", "--points", "400", "--out", str(out)])
    assert code == EXIT_OK
    assert "400 row(s) written" in capsys.readouterr().out
    frame = pd.read_csv(out, comment="#")
    assert frame.shape == (400, 10)
    assert frame["lambda_min"].min() < 0


def test_passify_shift_writes_model_and_report(tmp_path, capsys):
    out = tmp_path / "toy_shift.json"
    assert main(["passify", TOY, "--method", "shift", "--out", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "[passify] Settings:" in printed
    assert "METHOD" in printed

    G = read_model(out).realization
    assert G.n == 1
    report = read_report(tmp_path / "toy_shift_report.json")
    assert report["model"] == "toy"
    assert report["method"] == "shift"
    assert report["alpha"] == report["nu"]
    assert report["violations"] == []
    assert abs(report["achieved_delta_minus"]) <= 1e-6


def test_passify_passive_model_is_an_error(tmp_path, capsys):
    assert main(["passify", LOWPASS, "--method", "shift", "--out", str(tmp_path / "x.json")]) == EXIT_ERROR
    assert "NotPassifiableError" in capsys.readouterr().err


@pytest.mark.slow
@pytest.mark.parametrize("args, states", [
    (["--method", "partfrac", "--m", "5"], 50),
    (["--method", "minimax"], 45),
])
def test_passify_dumi1(tmp_path, capsys, args, states):
    out = tmp_path / "dumi1.json"
    assert main(["passify", DUMI1, *args, "--out", str(out)]) == EXIT_OK
    report = read_report(tmp_path / "dumi1_report.json")
    assert report["states"] == states
    assert read_model(out).realization.n == states


def test_compare_model_with_itself(capsys):
    assert main(["compare", TOY, TOY, "--points", "20"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ["omega", "relerr"]
    assert frame["relerr"].max() == 0.0


def test_dump_zeta_approximant(capsys):
    assert main(["dump-approximant", "--family", "zeta", "--m", "2"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["order"] == 4
    assert len(data["complex_terms"]) == 1
    assert data["real_terms"][0]["pole"] == -2.0


def test_dump_minimax_approximant(capsys):
    assert main(["dump-approximant", "--family", "minimax", "--a", "0.5", "--b", "2"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["family"] == "minimax"
    assert data["tau"] == pytest.approx(0.6)
    assert data["kappa"] == pytest.approx(0.8)
    assert data["interval"] == [-0.5, 2.0]


def test_bad_arguments_exit_with_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["passify", TOY, "--method", "magic"])
    assert info.value.code == 2
