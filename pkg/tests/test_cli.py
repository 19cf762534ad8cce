import csv
import json

import numpy as np
import pytest

from shiftmatch import DesignModel, NoiseModel, builtin_template, generate_shift, make_rng
from shiftmatch.cli import main


def test_theory_template_a(tmp_path, capsys):
    rc = main(["theory", "--template", "A", "--loss", "squared", "--noise", "gaussian:1",
               "--out", str(tmp_path)])
    assert rc == 0
    out = json.loads((tmp_path / "theory.json").read_text())
    assert out["tau2"] == pytest.approx(0.125, abs=1e-9)


def test_theory_jump_template(tmp_path):
    assert main(["theory", "--template", "D", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "theory.json").read_text())["jump_constant"] == 4.0


def test_fit_zero_noise(tmp_path):
    d = generate_shift(builtin_template("A"), 0.12, DesignModel(), NoiseModel("degenerate0"),
                       400, "random", make_rng(1))
    d.to_csv(tmp_path / "d.csv")
    rc = main(["fit", "--data", str(tmp_path / "d.csv"), "--template", "A",
               "--bounds=-0.5,0.5", "--out", str(tmp_path)])
    assert rc == 0
    out = json.loads((tmp_path / "fit.json").read_text())
    assert abs(out["theta"] - 0.12) <= 1e-7


def test_fit_location_scale(tmp_path):
    d = generate_shift(builtin_template("C"), 0.0, DesignModel(), NoiseModel("gaussian", 0.2),
                       1000, "random", make_rng(2))
    d.to_csv(tmp_path / "d.csv")
    rc = main(["fit", "--data", str(tmp_path / "d.csv"), "--template", "C", "--model",
               "location_scale", "--bounds", "0.2,5;-0.25,0.25;0.5,2", "--out", str(tmp_path)])
    assert rc == 0
    theta = json.loads((tmp_path / "fit.json").read_text())["theta"]
    beta, xi, nu = theta["beta"], theta["xi"], theta["nu"]
    assert abs(beta - 1) < 0.05 and abs(xi) < 0.01 and abs(nu - 1) < 0.01


def test_limitlaw_csv(tmp_path):
    rc = main(["limitlaw", "--template", "C", "--repeats", "50", "--seed", "3",
               "--out", str(tmp_path)])
    assert rc == 0
    rows = list(csv.reader(open(tmp_path / "midpoints.csv")))
    assert rows[0] == ["midpoint"] and len(rows) == 51
    assert main(["limitlaw", "--template", "C", "--process", "nu", "--repeats", "5",
                 "--out", str(tmp_path)]) == 0


def test_experiment(tmp_path):
    rc = main(["experiment", "--template", "C", "--n", "300", "--repeats", "3",
               "--scaling", "n", "--out", str(tmp_path), "--workers", "1"])
    assert rc == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["results"][0]["n"] == 300
    assert (tmp_path / "errors_n300.csv").exists()


def test_tables_layout(tmp_path):
    rc = main(["tables", "--tables", "1,4", "--repeats", "1", "--out", str(tmp_path),
               "--workers", "1"])
    assert rc == 0
    t1 = list(csv.reader(open(tmp_path / "table1.csv")))
    assert t1[0] == ["template", "noise", "squared", "absolute", "huber", "tukey"]
    assert [r[:2] for r in t1[1:]] == [[t, nz] for t in "AB" for nz in ("Normal", "T3", "Cauchy")]
    t4 = list(csv.reader(open(tmp_path / "table4.csv")))
    assert [r[0] for r in t4[1:]] == ["100", "500", "1000", "5000", "10000"]


def test_print_config(capsys):
    assert main(["experiment", "--print-config", "--n", "50"]) == 0
    conf = json.loads(capsys.readouterr().out)
    assert conf["n"] == "50" and conf["repeats"] == 200


def test_config_file(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"template": "B"}')
    assert main(["theory", "--config", str(tmp_path / "c.json"), "--print-config"]) == 0
    assert json.loads(capsys.readouterr().out)["template"] == "B"


@pytest.mark.parametrize("argv", [
    ["fit"],
    ["theory", "--template", "Z"],
    ["theory", "--loss", "cubic"],
    ["bogus"],
    ["tables", "--tables", "x"],
])
def test_usage_errors_exit_1(argv, tmp_path):
    try:
        rc = main(argv + ["--out", str(tmp_path)] if argv[0] != "bogus" else argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == 1


def test_computational_error_exit_2(tmp_path):
    rc = main(["theory", "--template", "A", "--loss", "squared", "--noise", "cauchy",
               "--out", str(tmp_path)])
    assert rc == 2
