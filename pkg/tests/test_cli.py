import json

import pytest

from schatte.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exponents_stdout(capsys):
    code, out, _ = run(capsys, "exponents", "--resolution", "50")
    assert code == 0
    d = json.loads(out)
    assert d["gamma_sup_exact"] == "1/16"
    assert set(d) >= {"gamma_sup", "alpha_star", "grid_best", "violated_demo"}


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--dist", "uniform(0,0.5)", "--kmax", "3")
    lines = out.splitlines()
    assert lines[0] == "k,abs_coeff"
    assert lines[1] == "1,0.63661977236758138"
    assert lines[2] == "2,0"


def test_gamma_csv(capsys):
    code, out, _ = run(capsys, "gamma", "--dist", "uniform(0,1)", "--grid-step", "0.25")
    rows = [l.split(",") for l in out.splitlines()[1:]]
    assert len(rows) == 25
    assert ["0.25", "0.5", "0.125"] in rows


def test_usage_errors(capsys):
    assert run(capsys, "nope")[0] == 1
    assert run(capsys, "spectrum", "--dist", "gauss(0,1)")[0] == 1
    assert run(capsys, "verify", "rate", "--n-values", "64,128")[0] == 1
    assert run(capsys, "--threads", "0", "exponents")[0] == 1


def test_missing_config_is_usage_error(capsys, tmp_path):
    assert run(capsys, "--config", str(tmp_path / "none.json"), "exponents")[0] == 1


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dist": {"kind": "uniform", "a": 0, "b": 0.5}, "x": 1.0,
                               "n": 5, "seed": 9}))
    _, a, _ = run(capsys, "simulate", "--config", str(cfg))
    _, b, _ = run(capsys, "--config", str(cfg), "simulate", "--n", "3")
    assert len(a.splitlines()) == 6 and len(b.splitlines()) == 4
    assert a.splitlines()[:4] == b.splitlines()


def test_verify_exit_codes(capsys, tmp_path):
    base = ["verify", "covariance", "--dist", "uniform(0,0.5)", "--grid-step", "0.25",
            "--n-values", "256", "--out-dir", str(tmp_path)]
    assert run(capsys, *base, "--replicas", "2")[0] == 2
    rep = json.loads((tmp_path / "covariance.json").read_text())
    assert rep["verdict"] == "inconclusive"
    assert (tmp_path / "covariance.json.timing.json").exists()
    ctl = ["verify", "distribution", "--dist", "uniform(0,1)", "--grid-step", "0.0625",
           "--n", "1024", "--replicas", "800", "--out-dir", str(tmp_path)]
    assert run(capsys, *ctl, "--gamma-scale", "4")[0] == 0
