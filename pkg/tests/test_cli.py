import json
import subprocess
import sys

import numpy as np
import pytest

from stable_rough.cli import main
from stable_rough.stable_process import read_path_binary


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("RL_THREADS", "1")


def _header(path):
    first = open(path).readline()
    assert first.startswith("# ")
    return json.loads(first[2:])


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


def _write_csv(name, x, y):
    np.savetxt(name, np.column_stack([x, y]), delimiter=",")


def test_simulate_embeds_config_and_is_deterministic(tmp_path):
    args = ["simulate", "--alpha", "1.5", "--steps", "512", "--seed", "3", "--binary", "p.rlsp"]
    assert main(args + ["--out", "a.csv"]) == 0
    assert main(args + ["--out", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    head = _header("a.csv")
    assert head["schema"] == "rlv1"
    assert head["config"]["alpha"] == 1.5 and head["config"]["seed"] == 3
    data = np.loadtxt("a.csv", delimiter=",", comments="#", skiprows=2)
    assert data.shape == (513, 2)
    assert np.array_equal(read_path_binary("p.rlsp").values, data[:, 1])


def test_localtime_and_pvar_pipeline():
    assert main(["localtime", "--alpha", "1.8", "--steps", "4096", "--seed", "1", "--out", "L.csv"]) == 0
    assert main(["pvar", "--input", "L.csv", "--p", "3", "--out", "v.json"]) == 0
    body = json.load(open("v.json"))
    assert body["schema"] == "rlv1" and body["config"]["p"] == 3
    from stable_rough.variation import p_variation_exact

    vals = np.loadtxt("L.csv", delimiter=",", comments="#", skiprows=2)[:, 1]
    assert body["p_variation"] == pytest.approx(p_variation_exact(vals, 3.0), rel=1e-12)


def test_pvar_dyadic_bound_on_dyadic_input():
    x = np.linspace(0, 1, 65)
    _write_csv("d.csv", x, np.sin(7 * x))
    assert main(["pvar", "--input", "d.csv", "--p", "2", "--out", "v.json"]) == 0
    body = json.load(open("v.json"))
    assert body["dyadic_bound"]["bound"] >= body["p_variation"]


def test_fraccalc_laplacian_of_cos():
    assert main(["fraccalc", "--function", "cos", "--op", "laplacian", "--order", "1.5",
                 "--grid-lo", "-3.14159", "--grid-hi", "3.14159", "--grid-n", "33", "--out", "c.csv"]) == 0
    data = np.loadtxt("c.csv", delimiter=",", comments="#", skiprows=2)
    assert np.max(np.abs(data[:, 1] + np.cos(data[:, 0]))) < 1e-3


def test_young_from_csvs():
    x = np.linspace(0, 1, 1025)
    _write_csv("f.csv", x, x)
    _write_csv("g.csv", x, x ** 2)
    assert main(["young", "--f", "f.csv", "--g", "g.csv", "--p", "1", "--q", "1", "--out", "y.json"]) == 0
    assert json.load(open("y.json"))["value"] == pytest.approx(2 / 3, abs=1e-6)


def test_young_outside_regime_exits_3(capsys):
    x = np.linspace(0, 1, 9)
    _write_csv("f.csv", x, x)
    assert main(["young", "--f", "f.csv", "--g", "f.csv", "--p", "2", "--q", "2"]) == 3
    err = _error(capsys)
    assert err["exit_code"] == 3 and err["error"]["kind"] == "regime"


def test_young_on_mismatched_grids_exits_2():
    _write_csv("f.csv", np.linspace(0, 1, 9), np.zeros(9))
    _write_csv("g.csv", np.linspace(0, 2, 9), np.zeros(9))
    assert main(["young", "--f", "f.csv", "--g", "g.csv", "--p", "1", "--q", "1"]) == 2


def test_roughlift_and_strict_convergence_failure():
    x = np.linspace(-1, 1, 129)
    L = np.clip(1 - x ** 2, 0, None)
    np.savetxt("z.csv", np.column_stack([x, L, np.sin(3 * x)]), delimiter=",", header="x,L,g", comments="")
    assert main(["roughlift", "--input", "z.csv", "--alpha", "1.8", "--mmax", "8", "--max-level", "2",
                 "--out", "r.json"]) == 0
    body = json.load(open("r.json"))
    assert len(body["gaps"]) >= 1 and body["schema"] == "rlv1"
    assert main(["roughlift", "--input", "z.csv", "--alpha", "1.8", "--mmax", "2", "--tol", "1e-30",
                 "--strict"]) == 4


def test_empty_and_invalid_configs_exit_2(capsys):
    open("empty.json", "w").write("")
    assert main(["pvar", "--config", "empty.json"]) == 2
    open("obj.json", "w").write("{}")
    assert main(["--config", "obj.json"]) == 2
    open("bad.json", "w").write(json.dumps({"command": "pvar", "input": "x.csv", "p": 2, "colour": 1}))
    assert main(["--config", "bad.json"]) == 2
    assert _error(capsys)["error"]["kind"] == "schema"
    assert main(["pvar", "--p", "2"]) == 2
    assert main([]) == 2


def test_config_file_drives_a_run():
    x = np.linspace(0, 1, 17)
    _write_csv("d.csv", x, np.cos(5 * x))
    open("c.json", "w").write(json.dumps({"command": "pvar", "input": "d.csv", "p": 2.5, "out": "o.json"}))
    assert main(["--config", "c.json"]) == 0
    body = json.load(open("o.json"))
    assert body["config"]["p"] == 2.5 and body["config"]["command"] == "pvar"
    # flags override file values
    assert main(["pvar", "--config", "c.json", "--p", "3", "--out", "o3.json"]) == 0
    assert json.load(open("o3.json"))["config"]["p"] == 3


def test_ito_report_is_byte_identical(tmp_path):
    args = ["ito", "--regime", "young", "--function", "abs", "--alpha", "1.8", "--steps", "2048",
            "--seeds", "3"]
    assert main(args + ["--out", "a.json"]) == 0
    assert main(args + ["--out", "b.json", "--workers", "2"]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    body = json.load(open("a.json"))
    assert body["schema"] == "rlv1" and body["config"]["regime"] == "young"
    assert "residual" in body and "residual_se" in body["extras"]


def test_ito_regime_violation_exits_3():
    assert main(["ito", "--regime", "rough", "--alpha", "1.4", "--q", "2", "--steps", "64", "--seeds", "1"]) == 3
    assert main(["ito", "--regime", "young", "--alpha", "1.8", "--q", "3", "--steps", "64", "--seeds", "1"]) == 3


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "stable_rough", "simulate", "--steps", "16", "--out", "s.csv"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "s.csv" in out.stdout
