import json

import numpy as np
import pytest

from setscan.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from setscan.geometry import read_csv, write_csv


@pytest.fixture
def shell_csv(tmp_path):
    path = tmp_path / "shell.csv"
    assert main(["sample", "--shape", "shell", "--n", "2000", "--d", "2", "--A", "0.2",
                 "--seed", "1", "--output", str(path)]) == EXIT_OK
    return path


def load(path):
    return json.loads(path.read_text())


def test_sample(shell_csv):
    pts = read_csv(shell_csv)
    assert pts.shape == (2000, 2)
    r = np.linalg.norm(pts, axis=1)
    assert r.min() >= 0.8 and r.max() <= 1.2


def test_sample_reproducible(tmp_path, shell_csv):
    again = tmp_path / "again.csv"
    main(["sample", "--shape", "shell", "--n", "2000", "--d", "2", "--A", "0.2", "--seed", "1",
          "--output", str(again)])
    assert again.read_text() == shell_csv.read_text()


def test_detect_dim(tmp_path, shell_csv):
    out = tmp_path / "dim.json"
    assert main(["detect-dim", "--input", str(shell_csv), "--report", str(out)]) == EXIT_OK
    rep = load(out)
    assert rep["full_dimensional"] is True
    assert set(rep) >= {"n", "d", "r_used", "delta0", "n_boundary", "n_peel"}
    assert main(["detect-dim", "--input", str(shell_csv), "--radius", "0.01",
                 "--report", str(out)]) == EXIT_OK
    assert load(out)["r_used"] == 0.01


def test_estimate_noise(tmp_path, shell_csv):
    out = tmp_path / "noise.json"
    for method in ("bb", "rconvex"):
        assert main(["estimate-noise", "--input", str(shell_csv), "--method", method,
                     "--report", str(out)]) == EXIT_OK
        rep = load(out)
        assert rep["method"] == method and 0.1 < rep["value"] < 0.3


def test_denoise(tmp_path, shell_csv):
    out, rep = tmp_path / "z.csv", tmp_path / "den.json"
    assert main(["denoise", "--input", str(shell_csv), "--output", str(out), "--report",
                 str(rep), "--reference", "sphere:0,0:1"]) == EXIT_OK
    report = load(rep)
    assert read_csv(out).shape == (report["m"], 2)
    assert report["hausdorff_to_reference"] < 0.3


def test_minkowski(tmp_path, shell_csv):
    rep = tmp_path / "mk.json"
    assert main(["minkowski", "--input", str(shell_csv), "--dprime", "1", "--noisy", "--r",
                 "0.1", "--mc", "20000", "--region", "shell", "--report", str(rep)]) == EXIT_OK
    report = load(rep)
    assert report["noisy"] and report["region"]["kind"] == "shell"
    assert abs(report["value"] / (2 * np.pi) - 1) < 0.5


def test_experiment(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"experiment": "table1", "replications": 3, "threshold": 3,
                                "n_max": 100, "grid": [{"d": 2, "A": 0.0}]}))
    out = tmp_path / "rep.json"
    assert main(["experiment", "--spec", str(spec), "--out", str(out),
                 "--csv", str(tmp_path / "csv")]) == EXIT_OK
    assert load(out)["cells"][0]["bracket"] == "<= 50"
    assert (tmp_path / "csv" / "table1_cells.csv").exists()


def test_config_errors(tmp_path, shell_csv):
    assert main(["detect-dim", "--input", str(tmp_path / "missing.csv")]) == EXIT_CONFIG
    assert main(["sample", "--shape", "torus", "--n", "5", "--output", "x.csv"]) == EXIT_CONFIG
    assert main(["denoise", "--input", str(shell_csv), "--lambda", "1.5",
                 "--output", str(tmp_path / "z.csv")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "table1", "replications": 2, "threshold": 5}))
    assert main(["experiment", "--spec", str(bad), "--out", str(tmp_path / "o.json")]) \
        == EXIT_CONFIG


def test_numerical_errors(tmp_path):
    dup = tmp_path / "dup.csv"
    write_csv(dup, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    assert main(["detect-dim", "--input", str(dup), "--radius", "0.5"]) == EXIT_NUMERICAL
    line = tmp_path / "line.csv"
    write_csv(line, [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assert main(["detect-dim", "--input", str(line), "--radius", "0.5"]) == EXIT_NUMERICAL


def test_stdout_report(shell_csv, capsys):
    assert main(["estimate-noise", "--input", str(shell_csv)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["method"] == "bb"
