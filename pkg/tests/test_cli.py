import io
import json
import subprocess
import sys

import pytest

from symspin.cli import ConfigError, RunConfig, frac, main, parse_points, parse_t_grid


def run(argv):
    buf = io.StringIO()
    code = main(argv, stdout=buf)
    out = buf.getvalue()
    return code, (json.loads(out) if out else None)


def test_parsers():
    assert parse_t_grid("0.001:0.01:5") == (0.001, 0.01, 5)
    assert parse_points("0,0;0.5,0") == ((0.0, 0.0), (0.5, 0.0))
    assert frac(__import__("fractions").Fraction(679, 15)) == "679/15"
    for bad in ("1:2", "a:b:c"):
        with pytest.raises(ConfigError):
            parse_t_grid(bad)
    with pytest.raises(ConfigError):
        parse_points("0,0")
    with pytest.raises(ConfigError):
        RunConfig("heat", t_grid=(0.0, 0.01, 4))
    with pytest.raises(ConfigError):
        RunConfig("nope")


def test_cp1_exact_strings(tmp_path):
    code, rep = run(["cp1", "--l", "0"])
    assert code == 0 and rep["schema"] == 1
    assert rep["exact"] == {"c_-1": "1/4", "c_0": "5/6", "c_1": "19/15"}
    assert max(rep["rel_err"].values()) <= 1e-6
    code, rep = run(["cp1", "--l", "1", "--out", str(tmp_path / "cp1.json")])
    assert code == 0 and rep is None
    saved = json.loads((tmp_path / "cp1.json").read_text())
    assert (saved["exact"]["c_0"], saved["exact"]["c_1"]) == ("29/6", "679/15")
    rows = (tmp_path / "cp1.csv").read_text().splitlines()
    assert rows[0] == "t,K" and len(rows) == 13


def test_cp1_t_grid_errors():
    assert run(["cp1", "--t-grid", "0.001:0.5:8"])[0] == 2
    assert run(["cp1", "--t-grid", "0.001:0.002:3"])[0] == 2


def test_heat_command():
    code, rep = run(["heat", "--model", "cp1", "--l", "2"])
    assert code == 0
    assert rep["exact"] == {"a0": "1/4", "a2": "77/6", "a4": "4879/15"}
    code, rep = run(["heat", "--model", "torus", "--l", "5"])
    assert code == 0 and rep["assembled"]["a2"] == 0.0
    code, rep = run(["heat", "--model", "twisted_flat", "--l", "1"])
    assert code == 0 and rep["generic"]["a4"] == "not provided by closed form"
    assert run(["heat", "--model", "twisted_flat", "--l", "1", "--convention", "printed"])[0] == 1
    assert run(["heat", "--model", "klein_bottle"])[0] == 2


def test_verify_algebra_small():
    code, rep = run(["verify-algebra", "--n", "2", "--l", "1", "--cutoff", "4"])
    assert code == 0 and rep["pass"]
    assert all(c["pass"] for c in rep["checks"])
    assert run(["verify-algebra", "--l", "3", "--cutoff", "4"])[0] == 2


def test_distance_small():
    code, rep = run(["distance", "--model", "torus", "--mesh", "16"])
    assert code == 0
    assert [e["N"] for e in rep["ladder"]] == [4, 8, 16]
    assert rep["d_geodesic"] == pytest.approx(0.5)
    code, rep = run(["distance", "--model", "torus", "--mesh", "8", "--points", "0.25,0.25;0.25,0.25"])
    assert code == 0 and rep["d_spectral"]["projected-ascent"]["tilde"] == 0.0
    assert run(["distance", "--model", "twisted_flat"])[0] == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"l": 1, "t-grid": "0.0001:0.0005:8", "tol": 1e-3}))
    code, rep = run(["cp1", "--config", str(cfg), "--l", "0"])
    assert code == 0
    assert rep["l"] == 0 and rep["config"]["tol"] == 1e-3 and rep["config"]["t_grid"] == [0.0001, 0.0005, 8]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["cp1", "--config", str(cfg)])[0] == 2
    assert run(["cp1", "--config", str(tmp_path / "missing.json")])[0] == 2


def test_usage_errors():
    assert run([])[0] == 2
    assert run(["cp1", "--l", "x"])[0] == 2
    assert run(["heat", "--l", "-1"])[0] == 2


def test_deterministic_output():
    a = run(["heat", "--model", "cp1", "--l", "1"])[1]
    b = run(["heat", "--model", "cp1", "--l", "1"])[1]
    assert json.dumps(a) == json.dumps(b)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "symspin", "cp1", "--l", "0"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["exact"]["c_0"] == "5/6"
