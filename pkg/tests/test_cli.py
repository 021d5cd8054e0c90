import json
import subprocess
import sys
from pathlib import Path

import pytest

from piecewise.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv,golden", [
    (["profile", "--group", "cayley-z", "--p", "2", "--vmax", "6"], "profile_z_l2.csv"),
    (["build", "--group", "houghton-3", "--radius", "3"], "build_houghton3.csv"),
    (["curves", "--name", "rho", "--param", "alpha=2", "--x", "0.25,0.5,1"], "curve_rho2.csv"),
    (["walk", "--group", "cayley-z", "--steps", "5"], "walk_z.csv"),
])
def test_golden_outputs(argv, golden, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["build", "--group", "cayley-z", "--frobnicate"],
    ["build"],
    ["build", "--group", "no-such-group"],
    ["walk", "--group", "cayley-z", "--steps", "2", "--mc"],
    ["verify", "--suite", "erschler"],
    ["curves", "--name", "inverse"],
    ["walk", "--group", "cayley-z", "--steps", "2", "--workers", "0"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 64
    assert "usage error" in err


def test_window_overflow_is_budget_error(capsys):
    code, _, err = run(["build", "--group", "cayley-z", "--radius", "100"], capsys)
    assert code == 3


def test_budget_exceeded_exit(capsys):
    code, out, _ = run(["profile", "--group", "cayley-z", "--vmax", "6", "--budget", "3"], capsys)
    assert code == 3
    assert out.startswith("v,value")


def test_validation_failure_exit(capsys):
    code, out, _ = run(["verify", "--suite", "star-word", "--form", "literal"], capsys)
    assert code == 2
    assert json.loads(out)["passed"] is False


def test_bubble_energy_verify(capsys):
    code, out, _ = run(["verify", "--suite", "bubble-energy", "--a", "8,16"], capsys)
    data = json.loads(out)
    assert code == 0 and data["schema_version"] == 1
    assert any(c["name"].endswith("norm, stated closed form") and not c["pass"] for c in data["checks"])


def test_profile_pocket_z3_full_table(capsys):
    code, out, _ = run(["profile", "--group", "pocket-z3", "--p", "2", "--vmax", "24"], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 25
    assert abs(float(lines[-1].split(",")[1])) < 1e-12


def test_glue_reports(capsys):
    code, out, _ = run(["glue", "--kind", "rooted", "--components", "z,z3", "--radius", "3"], capsys)
    data = json.loads(out)
    assert code == 0 and data["violations"] == [] and data["degree"] == 4
    assert run(["glue", "--kind", "pocket", "--components", "z,z3"], capsys)[0] == 64


def test_monte_carlo_workers_identical(capsys):
    base = ["walk", "--group", "pocket-z3", "--steps", "3", "--mc", "--trials", "400", "--seed", "9"]
    a = run(base, capsys)
    b = run(base + ["--workers", "4"], capsys)
    assert a == b


def test_cache_commands(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PIECEWISE_CACHE_DIR", str(tmp_path))
    assert run(["profile", "--group", "cayley-z", "--vmax", "5", "--cache", "z"], capsys)[0] == 0
    path = tmp_path / "profile-z.cache"
    code, out, _ = run(["cache", "verify", str(path)], capsys)
    assert code == 0 and json.loads(out)["kind"] == "profile"
    code, out, _ = run(["curves", "--name", "inverse_square", "--fit", str(path)], capsys)
    assert code == 0 and json.loads(out)["points"] == 5
    code, out, _ = run(["cache", "list"], capsys)
    assert "profile-z.cache,profile,ok" in out
    path.write_text(path.read_text().replace("0.5", "0.6"))
    assert run(["cache", "verify", str(path)], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.csv"
    proc = subprocess.run([sys.executable, "-m", "piecewise", "curves", "--name", "inverse", "--x", "1,2",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_bytes() == b"x,inverse\n1.0,1.0\n2.0,0.5\n"
